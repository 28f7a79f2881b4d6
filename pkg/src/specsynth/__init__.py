"""specsynth: deterministic synthetic specular-highlight rendering,
supervision masks, token-inpainting mechanics, and removal metrics."""

__version__ = "0.1.0"
