"""Token-space inpainting mechanics: seed construction, a small transformer,
and the visible/inpainted merge.

Forward-only at desk scale: weights are deterministically initialized from
a seed and never trained, so the module verifies mechanism and contracts
(pass-through, blend identities, permutation equivariance) rather than
learned quality. All token math runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate
from scipy.special import erf

__all__ = [
    "TokenGrid",
    "InpainterConfig",
    "InpainterWeights",
    "init_weights",
    "local_mean_prior",
    "positional_encoding",
    "build_seed",
    "vit_forward",
    "merge_completed",
    "inpainting_loss",
    "run_inpainter",
]


@dataclass
class TokenGrid:
    """A patch-grid of feature tokens with its inpainting mask (True = hole)."""

    tokens: np.ndarray  # (Hp, Wp, C) float64
    mask: np.ndarray    # (Hp, Wp) bool

    def __post_init__(self):
        self.tokens = np.asarray(self.tokens, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.tokens.ndim != 3:
            raise ValueError(f"tokens must be (Hp, Wp, C), got {self.tokens.shape}")
        if self.mask.shape != self.tokens.shape[:2]:
            raise ValueError(f"mask shape {self.mask.shape} does not match "
                             f"tokens {self.tokens.shape[:2]}")
        if not np.isfinite(self.tokens).all():
            raise ValueError("tokens contain non-finite values")

    @property
    def hp(self) -> int:
        return self.tokens.shape[0]

    @property
    def wp(self) -> int:
        return self.tokens.shape[1]

    @property
    def dim(self) -> int:
        return self.tokens.shape[2]


@dataclass(frozen=True)
class InpainterConfig:
    """Inpainter hyperparameters (library defaults; toy scale)."""

    dim: int = 64
    depth: int = 6
    heads: int = 4
    neighborhood: int = 3  # odd window for the local mean prior
    lam: float = 0.5       # mask-token blend coefficient
    seed: int = 0

    def __post_init__(self):
        if self.dim % self.heads != 0:
            raise ValueError(f"dim {self.dim} not divisible by heads {self.heads}")
        if self.dim % 4 != 0:
            raise ValueError("dim must be divisible by 4 for the 2-D encoding")
        if self.neighborhood < 3 or self.neighborhood % 2 == 0:
            raise ValueError("neighborhood must be odd and >= 3")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must be in [0, 1], got {self.lam}")


@dataclass
class _Block:
    ln1_g: np.ndarray
    ln1_b: np.ndarray
    w_qkv: np.ndarray
    b_qkv: np.ndarray
    w_proj: np.ndarray
    b_proj: np.ndarray
    ln2_g: np.ndarray
    ln2_b: np.ndarray
    w_fc1: np.ndarray
    b_fc1: np.ndarray
    w_fc2: np.ndarray
    b_fc2: np.ndarray


@dataclass
class InpainterWeights:
    """All inpainter parameters, a pure function of (config, seed)."""

    config: InpainterConfig
    mask_token: np.ndarray  # (C,)
    blocks: list
    ln_f_g: np.ndarray
    ln_f_b: np.ndarray


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_weights(config: InpainterConfig) -> InpainterWeights:
    """Deterministic weight initialization from the config seed."""
    rng = np.random.default_rng(config.seed)
    c = config.dim
    hidden = 4 * c
    mask_token = rng.normal(0.0, 0.02, size=c)
    blocks = []
    for _ in range(config.depth):
        blocks.append(_Block(
            ln1_g=np.ones(c), ln1_b=np.zeros(c),
            w_qkv=_xavier(rng, c, 3 * c), b_qkv=np.zeros(3 * c),
            w_proj=_xavier(rng, c, c), b_proj=np.zeros(c),
            ln2_g=np.ones(c), ln2_b=np.zeros(c),
            w_fc1=_xavier(rng, c, hidden), b_fc1=np.zeros(hidden),
            w_fc2=_xavier(rng, hidden, c), b_fc2=np.zeros(c),
        ))
    return InpainterWeights(config=config, mask_token=mask_token, blocks=blocks,
                            ln_f_g=np.ones(c), ln_f_b=np.zeros(c))


def local_mean_prior(grid: TokenGrid, k: int = 3) -> np.ndarray:
    """Mean of visible tokens in each k x k window, center excluded.

    Fallback chain for total coverage: a patch with no visible in-window
    neighbor takes the global mean of all visible tokens; a fully masked
    grid takes zero.
    """
    if k < 3 or k % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    vis = (~grid.mask).astype(np.float64)
    weighted = grid.tokens * vis[..., None]

    kernel = np.ones((k, k), dtype=np.float64)
    counts = correlate(vis, kernel, mode="constant", cval=0.0) - vis
    sums = np.stack(
        [correlate(weighted[..., ch], kernel, mode="constant", cval=0.0)
         for ch in range(grid.dim)], axis=-1) - weighted

    n_vis = vis.sum()
    if n_vis > 0:
        global_mean = weighted.sum(axis=(0, 1)) / n_vis
    else:
        global_mean = np.zeros(grid.dim)

    out = np.divide(sums, counts[..., None],
                    out=np.broadcast_to(global_mean, sums.shape).copy(),
                    where=counts[..., None] > 0)
    return out


def positional_encoding(hp: int, wp: int, dim: int) -> np.ndarray:
    """Fixed 2-D sinusoidal encoding, (Hp, Wp, dim).

    The first dim/2 channels encode the row index, the rest the column,
    each as interleaved sin/cos over dim/4 geometric frequencies. At
    position (0, 0) every sine channel is 0 and every cosine channel 1.
    """
    if dim % 4 != 0:
        raise ValueError(f"dim must be divisible by 4, got {dim}")
    half = dim // 2
    nfreq = half // 2
    freqs = 1.0 / (10000.0 ** (np.arange(nfreq, dtype=np.float64) / nfreq))

    def axis_encoding(positions: np.ndarray) -> np.ndarray:
        angles = positions[:, None] * freqs[None, :]
        enc = np.empty((positions.size, half), dtype=np.float64)
        enc[:, 0::2] = np.sin(angles)
        enc[:, 1::2] = np.cos(angles)
        return enc

    rows = axis_encoding(np.arange(hp, dtype=np.float64))
    cols = axis_encoding(np.arange(wp, dtype=np.float64))
    out = np.empty((hp, wp, dim), dtype=np.float64)
    out[:, :, :half] = rows[:, None, :]
    out[:, :, half:] = cols[None, :, :]
    return out


def build_seed(grid: TokenGrid, f_mean: np.ndarray, e_pos: np.ndarray,
               mask_token: np.ndarray, lam: float) -> np.ndarray:
    """Seed tokens: blend of mask token and local mean on holes, plus encodings.

    seed = P * (lam * mask_token + (1 - lam) * f_mean)
         + (1 - P) * tokens + e_pos, with e_pos added to every token.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must be in [0, 1], got {lam}")
    if f_mean.shape != grid.tokens.shape or e_pos.shape != grid.tokens.shape:
        raise ValueError("field shapes must match the token grid")
    p = grid.mask[..., None]
    filler = lam * mask_token[None, None, :] + (1.0 - lam) * f_mean
    return np.where(p, filler, grid.tokens) + e_pos


def _layer_norm(x: np.ndarray, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + 1e-6) * g + b


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def _attention(x: np.ndarray, blk: _Block, heads: int) -> np.ndarray:
    n, c = x.shape
    dh = c // heads
    qkv = x @ blk.w_qkv + blk.b_qkv
    qkv = qkv.reshape(n, 3, heads, dh).transpose(1, 2, 0, 3)  # (3, heads, N, dh)
    q, k, v = qkv[0], qkv[1], qkv[2]
    att = q @ k.transpose(0, 2, 1) / np.sqrt(dh)
    att = att - att.max(axis=-1, keepdims=True)
    att = np.exp(att)
    att /= att.sum(axis=-1, keepdims=True)
    out = (att @ v).transpose(1, 0, 2).reshape(n, c)
    return out @ blk.w_proj + blk.b_proj


def vit_forward(seed: np.ndarray, weights: InpainterWeights) -> np.ndarray:
    """Run the pre-norm transformer stack over the flattened token sequence.

    Each block applies self-attention and a 4x GELU feed-forward, both with
    residual connections; a final layer norm closes the stack. Raises on a
    non-finite intermediate (bad init or config).
    """
    hp, wp, c = seed.shape
    if c != weights.config.dim:
        raise ValueError(f"token dim {c} does not match config dim "
                         f"{weights.config.dim}")
    if not np.isfinite(seed).all():
        raise FloatingPointError("non-finite input tokens")
    x = seed.reshape(hp * wp, c).astype(np.float64)
    for blk in weights.blocks:
        x = x + _attention(_layer_norm(x, blk.ln1_g, blk.ln1_b), blk,
                           weights.config.heads)
        h = _gelu(_layer_norm(x, blk.ln2_g, blk.ln2_b) @ blk.w_fc1 + blk.b_fc1)
        x = x + h @ blk.w_fc2 + blk.b_fc2
        if not np.isfinite(x).all():
            raise FloatingPointError("non-finite transformer intermediate")
    x = _layer_norm(x, weights.ln_f_g, weights.ln_f_b)
    return x.reshape(hp, wp, c)


def merge_completed(grid: TokenGrid, refined: np.ndarray) -> np.ndarray:
    """Keep refined tokens on holes and the raw tokens elsewhere, bit-exact."""
    if refined.shape != grid.tokens.shape:
        raise ValueError(f"refined shape {refined.shape} does not match "
                         f"tokens {grid.tokens.shape}")
    return np.where(grid.mask[..., None], refined, grid.tokens)


def inpainting_loss(pred: np.ndarray, target: np.ndarray,
                    patch_train: np.ndarray, alpha: float = 0.25
                    ) -> tuple[float, np.ndarray]:
    """Per-patch L1 plus cosine dissimilarity, averaged over trained patches.

    For each patch in ``patch_train``: alpha * |target - pred|_1 +
    (1 - alpha) * (1 - cos(target, pred)), with tokens L2-normalized inside
    the cosine (1e-8 epsilon in the denominator). Returns the scalar loss
    and its analytic gradient with respect to ``pred``; an empty train set
    gives (0, zeros).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if p.shape != t.shape or patch_train.shape != p.shape[:2]:
        raise ValueError("pred/target/patch_train shapes do not agree")
    grad = np.zeros_like(p)
    sel = np.flatnonzero(patch_train.ravel())
    if sel.size == 0:
        return 0.0, grad

    eps = 1e-8
    c = p.shape[-1]
    pf = p.reshape(-1, c)[sel]
    tf = t.reshape(-1, c)[sel]

    l1 = np.abs(tf - pf).sum(axis=1)
    np_norm = np.linalg.norm(pf, axis=1)
    nt_norm = np.linalg.norm(tf, axis=1)
    denom = (np_norm + eps) * (nt_norm + eps)
    dot = (pf * tf).sum(axis=1)
    cos = dot / denom
    loss = (alpha * l1 + (1.0 - alpha) * (1.0 - cos)).mean()

    # d(1 - cos)/d pred = -t/denom + cos * p / (|p| * (|p| + eps))
    safe_np = np.where(np_norm > 0, np_norm, 1.0)
    dcos = (tf / denom[:, None]
            - (cos / (safe_np * (np_norm + eps)))[:, None] * pf
            * (np_norm > 0)[:, None])
    gsel = (alpha * np.sign(pf - tf) - (1.0 - alpha) * dcos) / sel.size
    grad.reshape(-1, c)[sel] = gsel
    return float(loss), grad


def run_inpainter(grid: TokenGrid, config: InpainterConfig,
                  weights: InpainterWeights | None = None) -> dict:
    """Full chain: local mean prior -> seed -> transformer -> merge.

    Returns a dict with the intermediate fields (f_mean, e_pos, f_seed,
    refined, f_comp) for inspection or export.
    """
    if weights is None:
        weights = init_weights(config)
    f_mean = local_mean_prior(grid, config.neighborhood)
    e_pos = positional_encoding(grid.hp, grid.wp, grid.dim)
    f_seed = build_seed(grid, f_mean, e_pos, weights.mask_token, config.lam)
    refined = vit_forward(f_seed, weights)
    f_comp = merge_completed(grid, refined)
    return {"f_mean": f_mean, "e_pos": e_pos, "f_seed": f_seed,
            "refined": refined, "f_comp": f_comp}
