"""Channel draws and random-vector-quantization (RVQ) limited feedback."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .numerics import sample_complex_gaussian, sample_isotropic_unit

MAX_CODEBOOK_BITS = 24
_A_ZERO = 1e-15


@dataclass(frozen=True)
class ChannelRealization:
    """One interval's channels; arrays have a trailing ``n_t`` axis.

    ``direct[i]`` is h_{i,i}, ``cross[i]`` the channel to the primary user,
    ``intra[i, j]`` the channel from transmitter ``i`` to its ``j``-th victim.
    """

    direct: np.ndarray
    cross: np.ndarray
    intra: np.ndarray


@dataclass(frozen=True)
class Codebook:
    entries: np.ndarray  # (2**bits, n_t), unit rows
    bits: int

    def __len__(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class QuantizationResult:
    """Selected codeword plus the error decomposition of the channel direction.

    ``direction == sqrt(1 - a) * exp(1j*phase) * codeword + sqrt(a) * s``;
    ``s`` is ``None`` when ``a`` is numerically zero.
    """

    index: int
    a: float
    s: np.ndarray
    phase: float
    codeword: np.ndarray
    direction: np.ndarray

    def reconstruct(self):
        out = np.sqrt(1.0 - self.a) * np.exp(1j * self.phase) * self.codeword
        if self.s is not None:
            out = out + np.sqrt(self.a) * self.s
        return out


def sample_realization(config, rng):
    """Draw every channel of one interval, independently per link."""
    n_t, k, l = config.n_t, config.k, config.l
    direct = np.stack([sample_complex_gaussian(n_t, config.sigma_direct[i], rng) for i in range(k)])
    cross = np.stack([sample_complex_gaussian(n_t, config.sigma_cross[i], rng) for i in range(k)])
    intra = np.zeros((k, l, n_t), dtype=complex)
    for i in range(k):
        for j in range(l):
            intra[i, j] = sample_complex_gaussian(n_t, config.intra_variance(i, j), rng)
    return ChannelRealization(direct=direct, cross=cross, intra=intra)


def build_codebook(n_t, bits, rng, max_bits=MAX_CODEBOOK_BITS):
    """RVQ codebook: ``2**bits`` independent isotropic unit vectors."""
    if n_t < 2:
        raise DomainError(f"n_t must be >= 2, got {n_t}")
    if bits < 0 or int(bits) != bits:
        raise DomainError(f"bits must be a nonnegative integer, got {bits!r}")
    if bits > max_bits:
        raise ResourceLimitError(f"codebook of 2^{bits} entries exceeds cap 2^{max_bits}")
    return Codebook(entries=sample_isotropic_unit(n_t, rng, size=2 ** int(bits)), bits=int(bits))


def quantize(g, codebook):
    """Pick the codeword best aligned with ``g`` and decompose the error.

    Ties go to the lowest index.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape != codebook.entries.shape[1:]:
        raise DomainError(f"channel shape {g.shape} does not match codebook {codebook.entries.shape[1:]}")
    norm = np.linalg.norm(g)
    if norm == 0.0:
        raise DomainError("cannot quantize a zero channel")
    direction = g / norm
    overlaps = codebook.entries.conj() @ direction  # c_l^H g~ per codeword
    index = int(np.argmax(np.abs(overlaps) ** 2))
    codeword = codebook.entries[index]
    inner = np.vdot(direction, codeword)  # g~^H c
    a = float(min(1.0, max(0.0, 1.0 - abs(inner) ** 2)))
    phase = -float(np.angle(inner))
    aligned = np.exp(1j * phase) * codeword
    if a > _A_ZERO:
        s = direction - np.sqrt(1.0 - a) * aligned
        s = s - np.vdot(codeword, s) * codeword
        s = s / np.linalg.norm(s)
    else:
        s = None
    return QuantizationResult(
        index=index, a=a, s=s, phase=phase, codeword=codeword, direction=direction
    )


def batch_quantize(g, codebooks):
    """Vectorised selection: ``g`` is ``(n, n_t)``, ``codebooks`` ``(n, 2**B, n_t)``.

    Returns ``(codewords, a)`` with shapes ``(n, n_t)`` and ``(n,)``.
    """
    direction = g / np.linalg.norm(g, axis=-1, keepdims=True)
    power = np.abs(np.einsum("ncd,nd->nc", codebooks.conj(), direction)) ** 2
    index = np.argmax(power, axis=1)
    rows = np.arange(g.shape[0])
    a = np.clip(1.0 - power[rows, index], 0.0, 1.0)
    return codebooks[rows, index], a
