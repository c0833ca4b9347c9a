"""Truncated bosonic Fock space over a discrete mode set.

Basis enumeration, ladder operators, the field Hamiltonian, and photon-cloud
creation products.  Truncation semantics: creation drops any component whose
total occupation would exceed the cap, which makes annihilation its exact
adjoint; products of creations then truncate consistently, so cloud
operators are well defined matrices.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _backend, util


class FockBasis:
    """Occupation-number basis with total occupation <= n_max.

    States are graded-lexicographically ordered (total first, then
    lexicographic on the occupation tuple), so the vacuum has index 0 and
    serialization is reproducible.
    """

    def __init__(self, n_modes, n_max, elec_dim=None):
        if n_modes < 1 or n_max < 0:
            raise ValueError("need n_modes >= 1 and n_max >= 0")
        self.n_modes = int(n_modes)
        self.n_max = int(n_max)
        count = _count_states(n_modes, n_max)
        # one complex state vector on the full (electron x Fock) space is the
        # unit the budget guards against
        util.check_memory(count * (elec_dim or 1) * 16, "Fock basis")
        self.states = _backend.enumerate_states(n_modes, n_max)
        assert self.states.shape == (count, n_modes)
        self.totals = self.states.sum(axis=1).astype(np.int64)
        self._index = None
        self._creation = None

    @property
    def size(self):
        return self.states.shape[0]

    def index(self, occ):
        """Ordinal of an occupation vector; KeyError if outside the basis."""
        if self._index is None:
            self._index = {
                bytes(row.tobytes()): i for i, row in enumerate(self.states)
            }
        return self._index[np.asarray(occ, dtype=np.int32).tobytes()]

    def creation_ops(self):
        """Per-mode creation matrices a*_m as CSR, cached."""
        if self._creation is None:
            rows, cols, vals, ptr = _backend.creation_tables(self.states, self.n_max)
            n = self.size
            ops = []
            for m in range(self.n_modes):
                sl = slice(ptr[m], ptr[m + 1])
                mat = sp.csr_matrix(
                    (vals[sl], (rows[sl], cols[sl])), shape=(n, n), dtype=complex
                )
                mat.sort_indices()
                ops.append(mat)
            self._creation = ops
        return self._creation

    def sector_mask(self, max_total):
        """Boolean mask of states with total occupation <= max_total."""
        return self.totals <= max_total


def _count_states(n_modes, n_max):
    from math import comb

    return comb(n_modes + n_max, n_max)


def build_basis(n_modes, n_max, elec_dim=None):
    """FockBasis constructor with the memory-budget guard applied."""
    return FockBasis(n_modes, n_max, elec_dim=elec_dim)


class ManyBodyOperator:
    """Thin wrapper over a sparse matrix with an exact-hermiticity flag."""

    def __init__(self, mat, hermitian=False):
        mat = sp.csr_matrix(mat)
        mat.sort_indices()
        if hermitian:
            gap = (mat - mat.conjugate().transpose()).tocoo()
            if gap.nnz and np.max(np.abs(gap.data)) != 0.0:
                raise ValueError("hermitian_flag set but A != A^dagger")
        self.mat = mat
        self.hermitian = bool(hermitian)

    @property
    def shape(self):
        return self.mat.shape

    def dot(self, v):
        return self.mat.dot(v)

    def adjoint(self):
        return ManyBodyOperator(self.mat.conjugate().transpose(), self.hermitian)

    def to_triplets(self):
        coo = self.mat.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def __matmul__(self, other):
        other_mat = other.mat if isinstance(other, ManyBodyOperator) else other
        return ManyBodyOperator(self.mat @ other_mat)

    def __sub__(self, other):
        return ManyBodyOperator(self.mat - other.mat)

    def max_abs(self):
        coo = self.mat.tocoo()
        return float(np.max(np.abs(coo.data))) if coo.nnz else 0.0


def ladder(basis, f, kind):
    """Smeared ladder operator on the photon factor.

    kind='create' gives a*(f) = sum_m f_m a*_m (linear in f); 'annihilate'
    gives its exact adjoint a(f) = sum_m conj(f_m) a_m (antilinear).
    """
    f = np.asarray(f, dtype=complex)
    if f.shape != (basis.n_modes,):
        raise ValueError(f"coefficient vector must have length {basis.n_modes}")
    ops = basis.creation_ops()
    acc = sp.csr_matrix((basis.size, basis.size), dtype=complex)
    for fm, cm in zip(f, ops):
        if fm != 0.0:
            acc = acc + fm * cm
    if kind == "create":
        return ManyBodyOperator(acc)
    if kind == "annihilate":
        return ManyBodyOperator(acc.conjugate().transpose())
    raise ValueError("kind must be 'create' or 'annihilate'")


def field_hamiltonian(basis, omegas):
    """Diagonal photon energy sum_m n_m omega_m."""
    omegas = np.asarray(omegas, dtype=float)
    if omegas.shape != (basis.n_modes,):
        raise ValueError("one energy per mode required")
    if np.any(omegas <= 0):
        raise ValueError("mode energies must be positive")
    diag = basis.states @ omegas
    return ManyBodyOperator(sp.diags(diag.astype(complex)).tocsr(), hermitian=True)


@dataclass
class Orbital:
    """One photon orbital: discrete coefficients and/or a function of k."""

    n: int
    coeffs: np.ndarray = None
    func: callable = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("multiplicity must be >= 1")
        if self.coeffs is None and self.func is None:
            raise ValueError("orbital needs coefficients or a function")
        if self.coeffs is not None:
            self.coeffs = np.asarray(self.coeffs, dtype=complex)


@dataclass
class PhotonCloud:
    """Finite list of orbitals with multiplicities; N = sum of multiplicities."""

    orbitals: list = field(default_factory=list)

    @classmethod
    def from_vectors(cls, pairs):
        return cls([Orbital(n=n, coeffs=v) for v, n in pairs])

    @classmethod
    def from_functions(cls, pairs):
        return cls([Orbital(n=n, func=f) for f, n in pairs])

    @property
    def N(self):
        return sum(o.n for o in self.orbitals)

    def coefficient_matrix(self):
        """Orbitals as rows of a (m, M) matrix; requires discrete coefficients."""
        if any(o.coeffs is None for o in self.orbitals):
            raise ValueError("cloud has function orbitals; discretize first")
        return np.vstack([o.coeffs for o in self.orbitals])

    def gram_defect(self):
        """Max deviation of the coefficient Gram matrix from the identity."""
        cm = self.coefficient_matrix()
        gram = cm.conj() @ cm.T
        return float(np.max(np.abs(gram - np.eye(cm.shape[0]))))

    def check_orthonormal(self, tol=1e-10):
        defect = self.gram_defect()
        if defect > tol:
            raise ValueError(f"cloud orbitals not orthonormal: defect {defect:.3e}")

    def phased(self, s, omegas):
        """Free-evolution phases: every orbital coefficient picks e^{-is omega_m}."""
        ph = np.exp(-1j * s * np.asarray(omegas, dtype=float))
        return PhotonCloud(
            [Orbital(n=o.n, coeffs=o.coeffs * ph, func=o.func) for o in self.orbitals]
        )

    def discretized(self, model, renormalize=False):
        """Sample function orbitals onto a model's mode grid.

        Coefficients are function values times sqrt(mode weight), so discrete
        inner products approximate the continuum ones.  With renormalize=True
        each coefficient vector is rescaled to unit norm, which keeps the
        discrete combinatorial identities exact on coarse grids.
        """
        orbs = []
        for o in self.orbitals:
            if o.coeffs is not None:
                orbs.append(Orbital(n=o.n, coeffs=o.coeffs, func=o.func))
                continue
            vals = np.asarray(o.func(model.k_points), dtype=complex)
            coeffs = np.sqrt(model.weights) * vals
            if renormalize:
                nrm = np.linalg.norm(coeffs)
                if nrm == 0:
                    raise ValueError("orbital vanishes on the mode grid")
                coeffs = coeffs / nrm
            orbs.append(Orbital(n=o.n, coeffs=coeffs, func=o.func))
        return PhotonCloud(orbs)


def cloud_operator(basis, cloud):
    """Creation product a*(phi_1)^{n_1} ... a*(phi_m)^{n_m} on the photon factor.

    Orbitals must carry discrete coefficients.  Free Heisenberg evolution is
    obtained by applying cloud.phased(s, omegas) first.
    """
    if cloud.N > basis.n_max:
        raise ValueError(f"cloud has {cloud.N} photons, cap is {basis.n_max}")
    acc = sp.identity(basis.size, dtype=complex, format="csr")
    for orb in cloud.orbitals:
        cm = ladder(basis, orb.coeffs, "create").mat
        for _ in range(orb.n):
            acc = cm @ acc
    return ManyBodyOperator(acc)
