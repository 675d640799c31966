"""Numerical checks that joint measurability and nondisturbance of projective
measurements each coincide with commutativity.

Floating-point complex arithmetic only; nothing here feeds the exact modules.
Norms are operator (spectral) norms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9
CLUSTER_GAP = 1e-6


class QuantumError(ValueError):
    pass


class NotHermitian(QuantumError):
    pass


class DegenerateClustering(QuantumError):
    pass


class DimensionMismatch(QuantumError):
    pass


class EquivalenceViolation(AssertionError):
    pass


def opnorm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, ord=2)) if M.size else 0.0


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


@dataclass(frozen=True)
class ProjectiveObservable:
    matrix: np.ndarray
    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def reconstruction_error(self) -> float:
        rebuilt = sum(lam * P for lam, P in zip(self.eigenvalues, self.projectors))
        return opnorm(self.matrix - rebuilt)

    def completeness_error(self) -> float:
        return opnorm(sum(self.projectors) - np.eye(self.dimension))

    def projector_error(self) -> float:
        """Worst deviation from Hermitian, idempotent, mutually orthogonal projectors."""
        worst = 0.0
        for i, P in enumerate(self.projectors):
            worst = max(worst, opnorm(P - dagger(P)), opnorm(P @ P - P))
            for Q in self.projectors[i + 1:]:
                worst = max(worst, opnorm(P @ Q))
        return worst

    def distribution(self, rho: np.ndarray) -> np.ndarray:
        return np.array([np.trace(rho @ P).real for P in self.projectors])


def spectral_decompose(H, tol: float = TOL, cluster_gap: float = CLUSTER_GAP) -> ProjectiveObservable:
    """Eigenvalues grouped into clusters, one orthogonal projector per cluster.

    Neighbouring eigenvalues closer than ``tol`` are merged and those farther
    apart than ``cluster_gap`` are separated; anything in between is refused.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise QuantumError(f"expected a square matrix, got shape {H.shape}")
    herm = opnorm(H - dagger(H))
    if herm > tol:
        raise NotHermitian(f"||H - H^dagger|| = {herm:.3e} > {tol:.1e}")
    H = (H + dagger(H)) / 2
    w, V = np.linalg.eigh(H)
    clusters: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        gap = w[k] - w[k - 1]
        if gap <= tol:
            clusters[-1].append(k)
        elif gap >= cluster_gap:
            clusters.append([k])
        else:
            raise DegenerateClustering(
                f"eigenvalue gap {gap:.3e} between {w[k - 1]!r} and {w[k]!r} is ambiguous"
            )
    eigenvalues = tuple(float(np.mean(w[c])) for c in clusters)
    projectors = tuple(V[:, c] @ dagger(V[:, c]) for c in clusters)
    obs = ProjectiveObservable(H, eigenvalues, projectors)
    for err in (obs.reconstruction_error(), obs.completeness_error(), obs.projector_error()):
        if err > tol:
            raise QuantumError(f"spectral decomposition inaccurate: error {err:.3e}")
    return obs


def _as_observable(X, tol: float) -> ProjectiveObservable:
    return X if isinstance(X, ProjectiveObservable) else spectral_decompose(X, tol)


def _same_dim(A: ProjectiveObservable, B: ProjectiveObservable) -> None:
    if A.dimension != B.dimension:
        raise DimensionMismatch(f"dimensions {A.dimension} and {B.dimension} differ")


def probe_states(dim: int) -> list[np.ndarray]:
    """Basis states plus (|i> + |j>) and (|i> + i|j>) superpositions.

    Their density matrices span all d x d Hermitian matrices.
    """
    vecs = []
    eye = np.eye(dim, dtype=complex)
    vecs.extend(eye[i] for i in range(dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            vecs.append((eye[i] + eye[j]) / np.sqrt(2))
            vecs.append((eye[i] + 1j * eye[j]) / np.sqrt(2))
    return [np.outer(v, v.conj()) for v in vecs]


@dataclass
class PropertyResult:
    holds: bool
    residuals: dict[str, float] = field(default_factory=dict)
    # Outcome of the second, independent route through the same property.
    cross_check: bool | None = None
    joint: ProjectiveObservable | None = None


def commutes(A, B, tol: float = TOL) -> tuple[bool, float]:
    A, B = _as_observable(A, tol), _as_observable(B, tol)
    _same_dim(A, B)
    r = opnorm(A.matrix @ B.matrix - B.matrix @ A.matrix)
    return r <= tol, r


def joint_label(i: int, j: int, n_b: int) -> int:
    """Injection of (A eigenvalue index, B eigenvalue index) into the integers."""
    return i * n_b + j


def check_property_a(A, B, tol: float = TOL) -> PropertyResult:
    """A joint observable C with the products P_i Q_j as its projectors.

    The products are projectors exactly when the two observables commute; when
    they are, C is built and its outcome statistics are checked to contain
    both marginals on every test state.
    """
    A, B = _as_observable(A, tol), _as_observable(B, tol)
    _same_dim(A, B)
    nb = len(B.projectors)
    products = {}
    worst = 0.0
    for i, P in enumerate(A.projectors):
        for j, Q in enumerate(B.projectors):
            R = P @ Q
            worst = max(worst, opnorm(R - dagger(R)), opnorm(R @ R - R))
            products[(i, j)] = R
    result = PropertyResult(worst <= tol, {"product_projector": worst})
    if not result.holds:
        return result

    d = A.dimension
    C = sum(joint_label(i, j, nb) * R for (i, j), R in products.items())
    joint = spectral_decompose(C, tol)
    # Each eigenspace of C must be one of the nonzero products.
    nonzero = {joint_label(i, j, nb): R for (i, j), R in products.items() if opnorm(R) > tol}
    proj_err = 0.0
    labels_ok = len(joint.eigenvalues) == len(nonzero)
    for lam, Pc in zip(joint.eigenvalues, joint.projectors):
        k = int(round(lam))
        if abs(lam - k) > tol or k not in nonzero:
            labels_ok = False
            continue
        proj_err = max(proj_err, opnorm(Pc - nonzero[k]))
    marg_err = 0.0
    for rho in probe_states(d):
        pc = {joint_label(i, j, nb): np.trace(rho @ R).real for (i, j), R in products.items()}
        pa, pb = A.distribution(rho), B.distribution(rho)
        for i in range(len(A.projectors)):
            marg_err = max(marg_err, abs(sum(pc[joint_label(i, j, nb)] for j in range(nb)) - pa[i]))
        for j in range(nb):
            marg_err = max(marg_err, abs(sum(pc[joint_label(i, j, nb)] for i in range(len(A.projectors))) - pb[j]))
    result.residuals.update({"joint_projectors": proj_err, "joint_marginals": marg_err})
    result.cross_check = labels_ok and proj_err <= tol and marg_err <= tol
    result.joint = joint
    return result


def _sandwich_residuals(A: ProjectiveObservable, B: ProjectiveObservable) -> tuple[float, float]:
    """Residuals of sum_i P_i Q_j P_i = Q_j and sum_j Q_j P_i Q_j = P_i."""
    r_ab = max(opnorm(sum(P @ Q @ P for P in A.projectors) - Q) for Q in B.projectors)
    r_ba = max(opnorm(sum(Q @ P @ Q for Q in B.projectors) - P) for P in A.projectors)
    return r_ab, r_ba


def _repeat_disagreement(X: ProjectiveObservable, Y: ProjectiveObservable, rho: np.ndarray) -> float:
    """Probability that the two X outcomes differ in the sequence X, Y, X."""
    agree = 0.0
    for P in X.projectors:
        for Q in Y.projectors:
            K = P @ Q @ P
            agree += np.trace(K @ rho @ dagger(K)).real
    return 1.0 - agree


def check_property_b(A, B, tol: float = TOL) -> PropertyResult:
    """Symmetric nondisturbance: A agrees with itself in A B A, and B in B A B."""
    A, B = _as_observable(A, tol), _as_observable(B, tol)
    _same_dim(A, B)
    r_ab, r_ba = _sandwich_residuals(A, B)
    states = probe_states(A.dimension)
    aba = max(_repeat_disagreement(A, B, rho) for rho in states)
    bab = max(_repeat_disagreement(B, A, rho) for rho in states)
    return PropertyResult(
        max(r_ab, r_ba) <= tol,
        {"sum_P_Q_P": r_ab, "sum_Q_P_Q": r_ba, "ABA_disagreement": aba, "BAB_disagreement": bab},
        cross_check=max(aba, bab) <= tol,
    )


def _dephase(X: ProjectiveObservable, rho: np.ndarray) -> np.ndarray:
    return sum(P @ rho @ P for P in X.projectors)


def check_property_c(A, B, tol: float = TOL) -> PropertyResult:
    """Asymmetric nondisturbance: an unread A measurement leaves B's statistics alone.

    ``holds`` is the A-then-B direction; the B-then-A residual is reported too.
    """
    A, B = _as_observable(A, tol), _as_observable(B, tol)
    _same_dim(A, B)
    states = probe_states(A.dimension)
    a_then_b = max(
        float(np.max(np.abs(B.distribution(_dephase(A, rho)) - B.distribution(rho)))) for rho in states
    )
    b_then_a = max(
        float(np.max(np.abs(A.distribution(_dephase(B, rho)) - A.distribution(rho)))) for rho in states
    )
    r_ab, _ = _sandwich_residuals(A, B)
    return PropertyResult(
        a_then_b <= tol,
        {"A_then_B": a_then_b, "B_then_A": b_then_a, "sum_P_Q_P": r_ab},
        cross_check=r_ab <= tol,
    )


@dataclass
class LemmaReport:
    commutes: bool
    property_a: bool
    property_b: bool
    property_c: bool
    residuals: dict[str, float]

    @property
    def agree(self) -> bool:
        return len({self.commutes, self.property_a, self.property_b, self.property_c}) == 1

    def render(self) -> str:
        lines = [
            f"commutes:   {self.commutes}",
            f"property a: {self.property_a}  (joint observable)",
            f"property b: {self.property_b}  (symmetric nondisturbance)",
            f"property c: {self.property_c}  (asymmetric nondisturbance)",
            "residuals:",
        ]
        lines += [f"  {k}: {v:.3e}" for k, v in self.residuals.items()]
        return "\n".join(lines)


def lemma1_report(A, B, tol: float = TOL) -> LemmaReport:
    """Run all checks; any disagreement between them raises."""
    A, B = _as_observable(A, tol), _as_observable(B, tol)
    ok, comm = commutes(A, B, tol)
    a = check_property_a(A, B, tol)
    b = check_property_b(A, B, tol)
    c = check_property_c(A, B, tol)
    residuals = {"commutator": comm}
    for name, res in (("a", a), ("b", b), ("c", c)):
        residuals.update({f"{name}.{k}": v for k, v in res.residuals.items()})
    report = LemmaReport(ok, a.holds, b.holds, c.holds, residuals)
    routes_split = [
        name for name, r in (("a", a), ("b", b), ("c", c))
        if r.cross_check is not None and r.cross_check != r.holds
    ]
    if not report.agree or routes_split:
        raise EquivalenceViolation(
            f"checks disagree (independent routes split for {routes_split}):\n{report.render()}"
        )
    return report


# -- example pairs ------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_xz() -> tuple[np.ndarray, np.ndarray]:
    return PAULI_X.copy(), PAULI_Z.copy()


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_commuting_pair(rng: np.random.Generator, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Two observables diagonal in one random basis; small integer spectra,
    so degenerate eigenvalues are common."""
    U = random_unitary(rng, dim)
    a = rng.integers(-3, 4, size=dim).astype(float)
    b = rng.integers(-3, 4, size=dim).astype(float)
    return U @ np.diag(a) @ dagger(U), U @ np.diag(b) @ dagger(U)


def _spread_spectrum(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        s = np.sort(rng.uniform(-5, 5, size=dim))
        if dim == 1 or np.min(np.diff(s)) > 0.1:
            return s


def random_generic_pair(rng: np.random.Generator, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Two observables with nondegenerate spectra in independent random bases."""
    U, V = random_unitary(rng, dim), random_unitary(rng, dim)
    A = U @ np.diag(_spread_spectrum(rng, dim)) @ dagger(U)
    B = V @ np.diag(_spread_spectrum(rng, dim)) @ dagger(V)
    return A, B
