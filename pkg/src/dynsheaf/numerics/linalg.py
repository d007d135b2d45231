"""Labeled matrices, tolerance-aware rank/kernel, and least-squares fits."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import AmbiguousRank, OverdeterminedInconsistent
from .tolerances import DEFAULT


@dataclass(frozen=True)
class LabeledMatrix:
    """Complex matrix whose rows and columns carry hashable basis labels."""

    rows: tuple
    cols: tuple
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows, cols = tuple(self.rows), tuple(self.cols)
        a = np.array(self.entries, dtype=np.complex128).reshape(len(rows), len(cols))
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("duplicate basis labels")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite matrix entry")
        a.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", a)

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, np.zeros((len(rows), len(cols)), dtype=np.complex128))

    @property
    def shape(self):
        return self.entries.shape

    def permuted(self, row_order, col_order):
        a = self.entries[np.ix_(row_order, col_order)]
        return LabeledMatrix([self.rows[i] for i in row_order], [self.cols[j] for j in col_order], a)


@dataclass(frozen=True)
class RankResult:
    rank: int
    kernel: LabeledMatrix
    smallest_retained: float
    largest_discarded: float
    shape: tuple = (0, 0)

    @property
    def kernel_dim(self):
        return len(self.kernel.cols)

    @property
    def corank(self):
        """Dimension of the cokernel."""
        return self.shape[0] - self.rank

    @property
    def margin(self):
        """Relative gap ``largest_discarded / smallest_retained`` (0 when nothing is discarded)."""
        if self.smallest_retained == 0:
            return 0.0
        return self.largest_discarded / self.smallest_retained


def rank_and_kernel(m, tol=DEFAULT, check=True, scale=None):
    """Numerical rank and an orthonormal kernel basis via the SVD.

    The cutoff is ``eps_rank * sigma_max``, or ``eps_rank * scale`` when a
    reference scale is given (for a difference of operators whose own norm
    may cancel).  With ``check`` a singular value within a factor 10 of the
    cutoff raises :class:`AmbiguousRank`.
    """
    a = m.entries
    nr, nc = a.shape
    if nr == 0 or nc == 0:
        basis = np.eye(nc, dtype=np.complex128)
        km = LabeledMatrix(m.cols, [("ker", i) for i in range(nc)], basis)
        return RankResult(0, km, 0.0, 0.0, (nr, nc))
    _, s, vh = np.linalg.svd(a)
    smax = float(s[0]) if len(s) else 0.0
    if scale is not None:
        smax = max(smax, float(scale))
    cutoff = tol.eps_rank * smax
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s >= cutoff))
        if check:
            near = (s > cutoff / 10) & (s < cutoff * 10)
            if np.any(near):
                raise AmbiguousRank(
                    f"singular value {float(s[near][0]):.3e} is within a factor 10 of the cutoff {cutoff:.3e}",
                    singular_values=s.copy(),
                    cutoff=cutoff,
                )
    kernel = vh[rank:].conj().T
    smallest = float(s[rank - 1]) if rank else 0.0
    discarded = float(s[rank]) if rank < len(s) else 0.0
    km = LabeledMatrix(m.cols, [("ker", i) for i in range(nc - rank)], kernel)
    return RankResult(rank, km, smallest, discarded, (nr, nc))


def fit_in_basis(samples, basis_evaluator, tol=DEFAULT, check=True):
    """Least-squares coefficients of sampled values in a basis.

    ``samples`` is a sequence of ``(point, value)``; ``basis_evaluator`` maps
    an array of points to the ``(n_points, n_basis)`` matrix of basis values.
    The residual is the largest absolute misfit; it is compared with
    ``eps_residual`` scaled by the size of the data.
    """
    pts = np.array([s[0] for s in samples], dtype=np.complex128)
    vals = np.array([s[1] for s in samples], dtype=np.complex128)
    a = np.asarray(basis_evaluator(pts), dtype=np.complex128).reshape(len(pts), -1)
    if a.shape[1] > len(pts):
        raise ValueError("fewer samples than basis functions")
    if a.shape[1] == 0:
        coeffs = np.zeros(0, dtype=np.complex128)
    else:
        # column scaling keeps badly normalized basis elements from hurting lstsq
        norms = np.linalg.norm(a, axis=0)
        norms[norms == 0] = 1.0
        sol, *_ = np.linalg.lstsq(a / norms, vals, rcond=None)
        coeffs = sol / norms
    misfit = vals - a @ coeffs if a.shape[1] else vals
    residual = float(np.max(np.abs(misfit))) if len(misfit) else 0.0
    scale = max(1.0, float(np.max(np.abs(vals), initial=0.0)))
    if check and residual > tol.eps_residual * scale:
        raise OverdeterminedInconsistent(
            f"fit residual {residual:.3e} exceeds tolerance (data scale {scale:.3e})", residual=residual
        )
    return coeffs, residual
