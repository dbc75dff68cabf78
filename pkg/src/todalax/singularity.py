"""Singular points of the energy-momentum map and their local structure.

A point is singular exactly when the differentials of the n conserved
traces admit linear relations, and the number of relations (the corank of
the Jacobian) equals the number of doubly degenerate eigenvalues of the
two Lax representatives.  The deepest stratum consists of the relative
equilibria, where both spectra are known in closed form.  Near such
points, selected eigenvalue pairs are driven back together by a
Gauss-Newton iteration on the frozen-frame block coordinates, and the
local canonical structure (Poisson brackets of the block coordinates,
second derivative of the annihilating combination of the traces, and the
transverse oscillation frequency) is verified against analytic gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .lax import PhasePoint, SignVector, build_generator, build_lax
from .dynamics import coordinate_form, grad_combination, grad_F, poisson
from .spectral import DEGENERACY_TOL, SpectralData, annihilator, decompose

__all__ = [
    "PairTarget",
    "pair_slots",
    "all_pair_targets",
    "CorankReport",
    "corank",
    "OmegaPoint",
    "omega_point",
    "SingularPoint",
    "ConvergenceError",
    "StratumCollapseError",
    "find_singular",
    "perturbed_seed",
    "pairing_denominator",
    "pair_bracket",
    "transverse_frequency",
    "HessianReport",
    "hessian_structure_check",
    "BracketReport",
    "bracket_relations_check",
    "tangent_symplectic_check",
]

RANK_TOL = 1e-7


class ConvergenceError(RuntimeError):
    """Gauss-Newton failed to close the target gaps."""


class StratumCollapseError(RuntimeError):
    """Extra eigenvalue pairs degenerated alongside the requested ones."""


@dataclass(frozen=True)
class PairTarget:
    """One allowed degeneracy slot: a class and a 1-based pair ordinal.

    In the descending order the even-class pairs sit at 1-indexed positions
    (2r, 2r+1) and the odd-class pairs at (2s-1, 2s).
    """

    odd_class: bool
    ordinal: int

    def positions(self, n: int) -> tuple[int, int]:
        """0-indexed eigenvalue positions of this pair."""
        ne, no = pair_slots(n)
        limit = no if self.odd_class else ne
        if not 1 <= self.ordinal <= limit:
            raise ValueError(
                f"{'odd' if self.odd_class else 'even'} pair ordinal {self.ordinal} "
                f"out of range 1..{limit} for n = {n}"
            )
        if self.odd_class:
            return (2 * self.ordinal - 2, 2 * self.ordinal - 1)
        return (2 * self.ordinal - 1, 2 * self.ordinal)

    @property
    def label(self) -> str:
        return f"{'odd' if self.odd_class else 'even'}:{self.ordinal}"

    @staticmethod
    def parse(text: str) -> "PairTarget":
        cls, _, num = text.partition(":")
        if cls not in ("even", "odd") or not num.isdigit():
            raise ValueError(f"cannot parse pair target {text!r}; expected 'even:R' or 'odd:S'")
        return PairTarget(cls == "odd", int(num))


def pair_slots(n: int) -> tuple[int, int]:
    """Counts of allowed degeneracy slots: ((n-1)//2 even-class, n//2 odd-class)."""
    return (n - 1) // 2, n // 2


def all_pair_targets(n: int) -> list[PairTarget]:
    ne, no = pair_slots(n)
    return [PairTarget(False, r) for r in range(1, ne + 1)] + [
        PairTarget(True, s) for s in range(1, no + 1)
    ]


@dataclass(frozen=True)
class CorankReport:
    """Both sides of the rank identity at one point.

    ``corank`` counts singular values of the n x 2n Jacobian of the traces
    below rank_tol times the largest one; ``nu`` and ``nubar`` count the
    degenerate eigenvalue pairs of the two Lax representatives.  Singular
    values inside [0.1, 10] x rank_tol are flagged inconclusive and excluded
    from identity assertions.
    """

    z: PhasePoint
    singular_values: np.ndarray
    corank: int
    nu: int
    nubar: int
    null_basis: np.ndarray
    inconclusive: bool
    rank_tol: float

    @property
    def theorem_holds(self) -> bool:
        return self.corank == self.nu + self.nubar

    def to_json_dict(self) -> dict:
        from .reporting import float_str, vector_strs

        return {
            "q": vector_strs(self.z.q),
            "p": vector_strs(self.z.p),
            "singular_values": vector_strs(self.singular_values),
            "corank": self.corank,
            "nu": self.nu,
            "nubar": self.nubar,
            "null_basis": [vector_strs(row) for row in self.null_basis],
            "inconclusive": self.inconclusive,
            "rank_tol": float_str(self.rank_tol),
        }


def corank(
    z: PhasePoint, rank_tol: float = RANK_TOL, degeneracy_tol: float = DEGENERACY_TOL
) -> CorankReport:
    """Rank-decide the Jacobian of the traces and count Lax degeneracies."""
    n = z.n
    dF = np.array([grad_F(z, j).as_vector() for j in range(1, n + 1)])
    U, s, _ = np.linalg.svd(dF)
    smax = float(s[0])
    below = s < rank_tol * smax
    k = int(np.sum(below))
    band = (s >= 0.1 * rank_tol * smax) & (s <= 10.0 * rank_tol * smax)
    null_basis = U[:, n - k:].T.copy() if k else np.empty((0, n))

    nu = len(decompose(build_lax(z), degeneracy_tol).degenerate_pairs)
    nubar = len(
        decompose(build_lax(z, SignVector.odd(n)), degeneracy_tol).degenerate_pairs
    )
    return CorankReport(z, s, k, nu, nubar, null_basis, bool(np.any(band)), rank_tol)


@dataclass(frozen=True)
class OmegaPoint:
    """A relative equilibrium with its closed-form spectra.

    All positions equal q0 and all momenta p0; the even spectrum is
    p0 + 2cos(2 pi k / n) and the odd one p0 + 2cos(pi (2k+1) / n),
    k = 0..n-1, both returned descending.
    """

    z: PhasePoint
    even_values: np.ndarray
    odd_values: np.ndarray

    @property
    def n(self) -> int:
        return self.z.n


def omega_point(n: int, q0: float = 0.0, p0: float = 0.0) -> OmegaPoint:
    """The relative equilibrium with common position q0 and momentum p0."""
    if n < 2:
        raise ValueError("need at least two particles")
    k = np.arange(n)
    even = np.sort(p0 + 2.0 * np.cos(2.0 * np.pi * k / n))[::-1]
    odd = np.sort(p0 + 2.0 * np.cos(np.pi * (2.0 * k + 1.0) / n))[::-1]
    return OmegaPoint(PhasePoint(np.full(n, q0), np.full(n, p0)), even, odd)


def _class_sign(n: int, odd_class: bool) -> SignVector:
    return SignVector.odd(n) if odd_class else SignVector.even(n)


def _target_gaps(z: PhasePoint, targets: list[PairTarget]) -> np.ndarray:
    """Eigenvalue gap of every target pair, relative to max(1, spectral range)."""
    n = z.n
    gaps = np.empty(len(targets))
    spectra = {}
    for k, t in enumerate(targets):
        if t.odd_class not in spectra:
            vals = np.sort(np.linalg.eigvalsh(build_lax(z, _class_sign(n, t.odd_class)).entries))[::-1]
            spectra[t.odd_class] = vals
        vals = spectra[t.odd_class]
        i, j = t.positions(n)
        gaps[k] = (vals[i] - vals[j]) / max(1.0, float(vals[0] - vals[-1]))
    return gaps


def _pair_basis_at(z: PhasePoint, target: PairTarget):
    """Current canonical basis (u1, u2) of a target pair's 2-space."""
    from .spectral import _canonical_pair_basis

    n = z.n
    entries = build_lax(z, _class_sign(n, target.odd_class)).entries
    _, vecs = np.linalg.eigh(entries)
    vecs = vecs[:, ::-1]
    i, j = target.positions(n)
    u1, u2 = _canonical_pair_basis(vecs[:, i], vecs[:, j])
    return entries, u1, u2, vecs


@dataclass(frozen=True)
class SingularPoint:
    """A refined point where exactly the target pairs are degenerate."""

    z: PhasePoint
    targets: tuple[PairTarget, ...]
    residual_gaps: np.ndarray
    frequencies: np.ndarray
    iterations: int

    @property
    def n(self) -> int:
        return self.z.n

    def to_json_dict(self) -> dict:
        from .reporting import float_str, vector_strs

        return {
            "q": vector_strs(self.z.q),
            "p": vector_strs(self.z.p),
            "target_pairs": [t.label for t in self.targets],
            "residual_gaps": vector_strs(self.residual_gaps),
            "frequencies": vector_strs(self.frequencies),
            "iterations": self.iterations,
        }


def perturbed_seed(
    omega: OmegaPoint, open_targets: list[PairTarget], eps: float = 1e-2
) -> PhasePoint:
    """Displace a relative equilibrium so the given pairs open by about 2*eps.

    The minimum-norm displacement with first-order block coordinates
    (xi, eta) = (eps, 0) on every listed pair leaves the remaining pairs
    closed to second order; they are then re-closed by the finder.
    """
    z = omega.z
    rows = []
    rhs = []
    for t in open_targets:
        _, u1, u2, _ = _pair_basis_at(z, t)
        sign = _class_sign(z.n, t.odd_class)
        dxi = 0.5 * (
            coordinate_form(z, sign, u2, u2).as_vector()
            - coordinate_form(z, sign, u1, u1).as_vector()
        )
        deta = coordinate_form(z, sign, u1, u2).as_vector()
        rows.extend([dxi, deta])
        rhs.extend([eps, 0.0])
    A = np.array(rows)
    delta = np.linalg.lstsq(A, np.array(rhs), rcond=None)[0]
    return z.displaced(delta)


def find_singular(
    seed: PhasePoint,
    targets: list[PairTarget],
    max_iter: int = 50,
    gap_tol: float = 1e-10,
    min_overlap: float = 0.9,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> SingularPoint:
    """Drive the target eigenvalue pairs degenerate by Gauss-Newton.

    Each iteration freezes the current eigenbasis of every involved class,
    takes the minimum-norm step on the stacked (xi, eta) residuals computed
    from their exact frozen-frame gradients, and halves the step until the
    new pair eigenspaces keep overlap above ``min_overlap`` with the frozen
    ones.  Convergence means every target gap is below gap_tol relative to
    the spectral range; a degenerate non-target pair at the solution raises
    StratumCollapseError.
    """
    if not targets:
        raise ValueError("need at least one target pair")
    n = seed.n
    targets = list(targets)
    for t in targets:
        t.positions(n)  # validate ordinals early
    z = seed
    iterations = 0
    for it in range(max_iter + 1):
        gaps = _target_gaps(z, targets)
        if float(np.max(gaps)) < gap_tol:
            iterations = it
            break
        if it == max_iter:
            raise ConvergenceError(
                f"gaps {gaps} still above {gap_tol} after {max_iter} iterations"
            )
        residual = []
        rows = []
        frames = {}
        for t in targets:
            entries, u1, u2, _ = _pair_basis_at(z, t)
            frames[t] = (u1, u2)
            sign = _class_sign(n, t.odd_class)
            a = float(u1 @ entries @ u1)
            d = float(u2 @ entries @ u2)
            residual.extend([0.5 * (d - a), float(u1 @ entries @ u2)])
            dxi = 0.5 * (
                coordinate_form(z, sign, u2, u2).as_vector()
                - coordinate_form(z, sign, u1, u1).as_vector()
            )
            deta = coordinate_form(z, sign, u1, u2).as_vector()
            rows.extend([dxi, deta])
        J = np.array(rows)
        r = np.array(residual)
        delta = np.linalg.lstsq(J, -r, rcond=None)[0]

        for _ in range(30):
            z_new = z.displaced(delta)
            ok = True
            for t in targets:
                _, v1, v2, _ = _pair_basis_at(z_new, t)
                u1, u2 = frames[t]
                M = np.column_stack([u1, u2]).T @ np.column_stack([v1, v2])
                if float(np.linalg.svd(M, compute_uv=False)[-1]) < min_overlap:
                    ok = False
                    break
            if ok:
                break
            delta = 0.5 * delta
        else:
            raise ConvergenceError("step damping failed to keep the frame overlap")
        z = z_new

    # the only degenerate pairs at the solution must be the targets
    want = {(t.odd_class, t.positions(n)) for t in targets}
    have = set()
    for odd_class in (False, True):
        spec = decompose(build_lax(z, _class_sign(n, odd_class)), degeneracy_tol)
        have.update((odd_class, p) for p in spec.degenerate_pairs)
    extra = have - want
    missing = want - have
    if missing:
        raise ConvergenceError(f"target pairs {sorted(missing)} not degenerate at the solution")
    if extra:
        raise StratumCollapseError(
            f"collapsed onto a higher stratum: extra degenerate pairs {sorted(extra)}"
        )

    freqs = np.array([transverse_frequency(z, t, degeneracy_tol) for t in targets])
    return SingularPoint(z, tuple(targets), _target_gaps(z, targets), freqs, iterations)


def _degenerate_pair_data(z: PhasePoint, target: PairTarget, degeneracy_tol: float):
    """SpectralData, pair index, basis and annihilator for a degenerate target."""
    n = z.n
    spec = decompose(build_lax(z, _class_sign(n, target.odd_class)), degeneracy_tol)
    positions = target.positions(n)
    try:
        idx = spec.degenerate_pairs.index(positions)
    except ValueError:
        raise ValueError(
            f"pair {target.label} (positions {positions}) is not degenerate at this point; "
            f"flagged pairs: {spec.degenerate_pairs}"
        ) from None
    u1, u2 = spec.pair_vectors(positions)
    ann = annihilator(spec, idx)
    return spec, idx, u1, u2, ann


def pairing_denominator(z: PhasePoint, odd_class: bool, u1: np.ndarray, u2: np.ndarray) -> float:
    """The antisymmetric pairing 2 u1 . M(z) . u2 of a degenerate pair basis.

    Equals -n b_m eps_m (u1_{m+1} u2_m - u1_m u2_{m+1}) independently of m;
    it cannot vanish for an orthonormal pair.
    """
    M = build_generator(z, 2, odd_class=odd_class).entries
    return 2.0 * float(u1 @ M @ u2)


def pair_bracket(z: PhasePoint, odd_class: bool, u1: np.ndarray, u2: np.ndarray) -> float:
    """Poisson bracket {xi, eta} of a degenerate pair, equal to the pairing / n."""
    return pairing_denominator(z, odd_class, u1, u2) / z.n


def transverse_frequency(
    point: PhasePoint | SingularPoint,
    target: PairTarget,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> float:
    """Frequency of the elliptic transverse oscillation fixing the stratum.

    omega = 2 T'(lambda*) {xi, eta}* for the pair's annihilating polynomial;
    the sign follows the deterministic pair basis (swapping the basis flips
    it), the magnitude is basis independent.
    """
    z = point.z if isinstance(point, SingularPoint) else point
    _, _, u1, u2, ann = _degenerate_pair_data(z, target, degeneracy_tol)
    denom = pairing_denominator(z, target.odd_class, u1, u2)
    if abs(denom) < 1e-10:
        raise RuntimeError(
            "vanishing pair pairing; the eigenpair basis lost orthonormality"
        )
    return 2.0 * ann.derivative_at_root * denom / z.n


def _pair_forms(z: PhasePoint, odd_class: bool, u1: np.ndarray, u2: np.ndarray):
    """Gradient 1-forms (dxi, deta, dtau) of one frozen pair, as 2n vectors."""
    sign = _class_sign(z.n, odd_class)
    f11 = coordinate_form(z, sign, u1, u1).as_vector()
    f22 = coordinate_form(z, sign, u2, u2).as_vector()
    f12 = coordinate_form(z, sign, u1, u2).as_vector()
    return 0.5 * (f22 - f11), f12, 0.5 * (f22 + f11)


def _symplectic_matrix(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclass(frozen=True)
class HessianReport:
    """Structure of the second derivative of the annihilating combination.

    The Hessian of G = sum_j c_j F_j at the singular point is the spectral
    dyad sum  sum_a T'(lambda_a) Q_a  over the distinct eigenvalues of the
    degenerate matrix: the target pair contributes
    2 T'(lambda*)(dxi dxi + deta deta + dtau dtau), any other degenerate
    pair a vanishing coefficient, and each simple eigenvalue its squared
    differential.  ``residual_pair_dyads`` measures the truncation to the
    target pair's three dyads alone; it is not small in general because the
    annihilator's derivative does not vanish at the simple eigenvalues.
    """

    target: PairTarget
    residual_full: float
    residual_pair_dyads: float
    omega_formula: float
    omega_spectrum: float
    spurious_eigenvalue: float
    trace_K_squared: float
    hessian_rank: int
    tol: float

    @property
    def omega_relative_error(self) -> float:
        return abs(abs(self.omega_formula) - self.omega_spectrum) / abs(self.omega_formula)

    @property
    def passed(self) -> bool:
        return (
            self.residual_full < self.tol
            and self.omega_relative_error < 1e-6
            and self.trace_K_squared < 0.0
            and self.spurious_eigenvalue < 1e-6 * abs(self.omega_formula)
        )


def hessian_structure_check(
    point: PhasePoint | SingularPoint,
    target: PairTarget,
    tol: float = 1e-6,
    step: float = 1e-5,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> HessianReport:
    """Verify the dyadic Hessian structure and the linearised flow spectrum.

    The Hessian is built by central differences of the analytic gradient of
    G, keeping it independent of the dyadic formula under test.  Checks:
    the full spectral dyad identity, eig(J G'') = one conjugate imaginary
    pair +-i omega and zeros, agreement of omega with the closed form, and
    ellipticity Tr (J G'')^2 = -2 omega^2 < 0.
    """
    z = point.z if isinstance(point, SingularPoint) else point
    n = z.n
    spec, idx, u1, u2, ann = _degenerate_pair_data(z, target, degeneracy_tol)
    c = ann.coefficients

    h = step * max(1.0, float(np.max(np.abs(z.as_vector()))))
    dim = 2 * n
    H = np.empty((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        gp = grad_combination(z.displaced(e), c).as_vector()
        gm = grad_combination(z.displaced(-e), c).as_vector()
        H[:, i] = (gp - gm) / (2.0 * h)
    H = 0.5 * (H + H.T)
    Hnorm = float(np.linalg.norm(H))

    dxi, deta, dtau = _pair_forms(z, target.odd_class, u1, u2)
    pair_block = np.outer(dxi, dxi) + np.outer(deta, deta) + np.outer(dtau, dtau)
    three = 2.0 * ann.derivative_at_root * pair_block

    full = three.copy()
    skip = set(spec.degenerate_pairs[idx])
    for other in spec.degenerate_pairs:
        if other == spec.degenerate_pairs[idx]:
            continue
        skip.update(other)
        v1, v2 = spec.pair_vectors(other)
        oxi, oeta, otau = _pair_forms(z, target.odd_class, v1, v2)
        coeff = 2.0 * ann.derivative(spec.pair_value(other))
        full += coeff * (np.outer(oxi, oxi) + np.outer(oeta, oeta) + np.outer(otau, otau))
    for k in range(n):
        if k in skip:
            continue
        uk = spec.vectors[:, k]
        dlam = coordinate_form(z, _class_sign(n, target.odd_class), uk, uk).as_vector()
        full += ann.derivative(float(spec.values[k])) * np.outer(dlam, dlam)

    K = _symplectic_matrix(n) @ H
    ev = np.linalg.eigvals(K)
    order = np.argsort(-np.abs(ev.imag))
    omega_spec = float(abs(ev.imag[order[0]]))
    spurious = float(abs(ev.imag[order[2]])) if dim > 2 else 0.0
    omega_formula = 2.0 * ann.derivative_at_root * pairing_denominator(
        z, target.odd_class, u1, u2
    ) / n
    rank = int(np.sum(np.abs(np.linalg.eigvalsh(H)) > 1e-6 * Hnorm))
    return HessianReport(
        target=target,
        residual_full=float(np.linalg.norm(H - full)) / Hnorm,
        residual_pair_dyads=float(np.linalg.norm(H - three)) / Hnorm,
        omega_formula=omega_formula,
        omega_spectrum=omega_spec,
        spurious_eigenvalue=spurious,
        trace_K_squared=float(np.trace(K @ K)),
        hessian_rank=rank,
        tol=tol,
    )


@dataclass(frozen=True)
class BracketReport:
    """Poisson-bracket table of all frozen block coordinates at one point."""

    labels: tuple[str, ...]
    table: np.ndarray
    zero_max: float
    ratio_errors: np.ndarray
    m_independence_max: float
    mixed_parity_max: float
    conjugate_formula_residual: float
    tol: float
    ratio_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.zero_max < self.tol
            and float(np.max(np.abs(self.ratio_errors))) < self.ratio_tol
            and self.m_independence_max < 1e-9
            and self.mixed_parity_max < self.tol
            and self.conjugate_formula_residual < self.tol
        )


def _conjugate_spot_check(
    z: PhasePoint, spec: SpectralData, pair: tuple[int, int]
) -> float:
    """Residual of the same-eigenvalue bracket formula for a conjugate sign vector.

    With sigma obtained from the class signs by two interior flips, the
    components u.L^eps.v and w.L^sigma.x built on a degenerate pair obey
    {f, g}* = -(2/n) [(v.D.x)(u.Meps.D.w) + (u.D.w)(v.Meps.D.x)]
    where D is the diagonal of accumulated sign products.
    """
    from .lax import conjugating_signs

    n = z.n
    eps = spec.sign
    flipped = eps.eps.copy()
    flipped[0] *= -1.0
    flipped[1 % n] *= -1.0
    sigma = SignVector(flipped)
    d = conjugating_signs(eps, sigma)
    S = np.diag(d)
    u1, u2 = spec.pair_vectors(pair)
    w1, w2 = S @ u1, S @ u2

    Meps = build_generator(z, 2, odd_class=(eps.parity() == -1)).entries
    D = np.diag(d)
    worst = 0.0
    cases = [(u1, u2, w1, w1), (u1, u2, w1, w2), (u1, u1, w1, w2)]
    for (u, v, w, x) in cases:
        gf = coordinate_form(z, eps, u, v)
        gg = coordinate_form(z, sigma, w, x)
        numeric = poisson(gf, gg)
        predicted = -(2.0 / n) * (
            float(v @ D @ x) * float(u @ Meps @ D @ w)
            + float(u @ D @ w) * float(v @ Meps @ D @ x)
        )
        worst = max(worst, abs(numeric - predicted))
    return worst


def bracket_relations_check(
    point: PhasePoint | SingularPoint,
    tol: float = 1e-7,
    ratio_tol: float = 1e-6,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> BracketReport:
    """Verify the canonical structure of the block coordinates at a singular point.

    All brackets among {xi_r, eta_r, tau_r} of both classes vanish except
    the same-pair {xi, eta}, whose value times n over the pairing
    2 u1 . M . u2 equals one.  The pairing itself is checked against its
    m-independent coupling form, mixed-parity spectral components bracket
    to zero, and the conjugate-class bracket formula is spot checked.
    """
    z = point.z if isinstance(point, SingularPoint) else point
    n = z.n
    labels: list[str] = []
    forms: list[np.ndarray] = []
    nonzero_partners: list[tuple[int, int]] = []
    ratio_errors = []
    m_indep = 0.0
    mixed_parity = 0.0
    conj_res = 0.0
    b = z.couplings()

    specs = {}
    for odd_class in (False, True):
        spec = decompose(build_lax(z, _class_sign(n, odd_class)), degeneracy_tol)
        specs[odd_class] = spec
        cls = "bar" if odd_class else ""
        for pair in spec.degenerate_pairs:
            u1, u2 = spec.pair_vectors(pair)
            dxi, deta, dtau = _pair_forms(z, odd_class, u1, u2)
            base = len(labels)
            labels += [f"xi{cls}[{pair[0]}]", f"eta{cls}[{pair[0]}]", f"tau{cls}[{pair[0]}]"]
            forms += [dxi, deta, dtau]
            nonzero_partners.append((base, base + 1))

            denom = pairing_denominator(z, odd_class, u1, u2)
            bracket = float(np.dot(dxi[:n], deta[n:]) - np.dot(dxi[n:], deta[:n]))
            ratio_errors.append(bracket * n / denom - 1.0)
            eps = _class_sign(n, odd_class).eps
            for m in range(n):
                mp = (m + 1) % n
                via_m = -n * b[m] * eps[m] * (u1[mp] * u2[m] - u1[m] * u2[mp])
                m_indep = max(m_indep, abs(denom - via_m))
        if spec.degenerate_pairs:
            conj_res = max(conj_res, _conjugate_spot_check(z, spec, spec.degenerate_pairs[0]))

    # mixed-parity spectral components: same or different eigenvalues, always zero
    if specs[False].degenerate_pairs and specs[True].degenerate_pairs:
        pe = specs[False].degenerate_pairs[0]
        po = specs[True].degenerate_pairs[0]
        ue1, ue2 = specs[False].pair_vectors(pe)
        uo1, uo2 = specs[True].pair_vectors(po)
        for (u, v) in [(ue1, ue2), (ue1, ue1)]:
            for (w, x) in [(uo1, uo2), (uo2, uo2)]:
                gf = coordinate_form(z, SignVector.even(n), u, v)
                gg = coordinate_form(z, SignVector.odd(n), w, x)
                mixed_parity = max(mixed_parity, abs(poisson(gf, gg)))

    m = len(labels)
    table = np.zeros((m, m))
    for i in range(m):
        fi = forms[i]
        for j in range(i + 1, m):
            fj = forms[j]
            table[i, j] = float(np.dot(fi[:n], fj[n:]) - np.dot(fi[n:], fj[:n]))
            table[j, i] = -table[i, j]
    zero_mask = np.triu(np.ones((m, m), dtype=bool), k=1)
    for (i, j) in nonzero_partners:
        zero_mask[i, j] = False
    zero_max = float(np.max(np.abs(table[zero_mask]))) if zero_mask.any() else 0.0

    return BracketReport(
        labels=tuple(labels),
        table=table,
        zero_max=zero_max,
        ratio_errors=np.array(ratio_errors),
        m_independence_max=float(m_indep),
        mixed_parity_max=float(mixed_parity),
        conjugate_formula_residual=float(conj_res),
        tol=tol,
        ratio_tol=ratio_tol,
    )


def tangent_symplectic_check(point: PhasePoint | SingularPoint,
                             degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """Smallest singular value of the symplectic form restricted to the stratum tangent.

    The tangent space is the joint kernel of the dxi and deta covectors of
    every degenerate pair; a positive return value witnesses that the
    stratum is a symplectic submanifold at this point.
    """
    z = point.z if isinstance(point, SingularPoint) else point
    n = z.n
    rows = []
    for odd_class in (False, True):
        spec = decompose(build_lax(z, _class_sign(n, odd_class)), degeneracy_tol)
        for pair in spec.degenerate_pairs:
            u1, u2 = spec.pair_vectors(pair)
            dxi, deta, _ = _pair_forms(z, odd_class, u1, u2)
            rows += [dxi, deta]
    if not rows:
        raise ValueError("no degenerate pairs; the point is regular")
    A = np.array(rows)
    _, _, Vt = np.linalg.svd(A)
    T = Vt[len(rows):].T  # orthonormal basis of the tangent space
    B = T.T @ _symplectic_matrix(n) @ T
    return float(np.linalg.svd(B, compute_uv=False)[-1])
