"""Eigen-decomposition of Lax matrices with degeneracy bookkeeping.

Eigenvalues are kept in descending order throughout.  Degeneracies of the
periodic Toda Lax matrices are at most two-fold, so a flagged triple is
treated as evidence of a tolerance or input fault rather than mathematics.
Near a singular point the frozen eigenbasis of the base point provides
first-order-accurate local coordinates (xi, eta, tau) for every degenerate
2x2 block, and the annihilating polynomial of the base matrix supplies the
coefficient vector that fixes the singularity under the integrable flows.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .lax import LaxMatrix, PhasePoint, SignVector, build_lax

__all__ = [
    "TripleDegeneracyError",
    "EigensolverError",
    "FrameValidityError",
    "SpectralData",
    "decompose",
    "interlacing_chain",
    "interlacing_check",
    "FrozenFrame",
    "freeze_frame",
    "BlockCoordinates",
    "block_coordinates",
    "AnnihilatorPolynomial",
    "annihilator",
]

DEGENERACY_TOL = 1e-8


class TripleDegeneracyError(RuntimeError):
    """Three eigenvalues inside one degeneracy window; impossible for valid input."""


class EigensolverError(RuntimeError):
    """Eigen-decomposition failed its residual or orthonormality bound."""


class FrameValidityError(RuntimeError):
    """Current eigenspaces overlap the frozen frame too weakly."""


@dataclass(frozen=True)
class SpectralData:
    """Descending spectrum of a Lax matrix with orthonormal eigenvectors.

    ``degenerate_pairs`` lists 0-indexed position pairs (i, i+1) whose gap
    fell below the degeneracy threshold; within each such pair the two
    columns of ``vectors`` are deterministically rotated inside their
    2-dimensional eigenspace.
    """

    values: np.ndarray
    vectors: np.ndarray
    gaps: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...]
    sign: SignVector

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def spectral_range(self) -> float:
        return float(self.values[0] - self.values[-1])

    def pair_vectors(self, pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        i, j = pair
        return self.vectors[:, i], self.vectors[:, j]

    def pair_value(self, pair: tuple[int, int]) -> float:
        i, j = pair
        return float(0.5 * (self.values[i] + self.values[j]))


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def _canonical_pair_basis(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal basis of span{v1, v2}.

    The first vector maximises (and makes nonnegative) the first coordinate
    with a non-negligible projection onto the span; the second is the
    remaining direction with a fixed sign.
    """
    n = v1.size
    P = np.outer(v1, v1) + np.outer(v2, v2)
    k = 0
    if np.linalg.norm(P[:, 0]) < 1e-8:
        k = int(np.argmax(np.linalg.norm(P, axis=0)))
    w1 = P[:, k] / np.linalg.norm(P[:, k])
    Q = P - np.outer(w1, w1)
    j = int(np.argmax(np.linalg.norm(Q, axis=0)))
    w2 = Q[:, j] / np.linalg.norm(Q[:, j])
    if w2[j] < 0:
        w2 = -w2
    return w1, w2


def _align_pair_to_reference(
    v1: np.ndarray, v2: np.ndarray, r1: np.ndarray, r2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Rotate (v1, v2) inside their span to maximal overlap with (r1, r2)."""
    V = np.column_stack([v1, v2])
    M = V.T @ np.column_stack([r1, r2])
    U, _, Wt = np.linalg.svd(M)
    W = V @ (U @ Wt)
    return W[:, 0], W[:, 1]


def decompose(
    L: LaxMatrix | np.ndarray,
    degeneracy_tol: float = DEGENERACY_TOL,
    reference: np.ndarray | None = None,
    sign: SignVector | None = None,
) -> SpectralData:
    """Descending eigen-decomposition with degenerate-pair detection.

    A gap below degeneracy_tol * max(1, spectral range) flags the pair;
    two consecutive flagged gaps abort with TripleDegeneracyError.  Inside
    each flagged pair the basis is rotated deterministically, or to maximal
    overlap with the matching columns of ``reference`` when supplied.
    """
    if isinstance(L, LaxMatrix):
        entries, sgn = L.entries, L.sign
    else:
        entries = np.asarray(L, dtype=float)
        sgn = sign if sign is not None else SignVector.even(entries.shape[0])
    if not np.allclose(entries, entries.T, atol=1e-12 * max(1.0, np.abs(entries).max())):
        raise ValueError("matrix is not symmetric")

    try:
        vals, vecs = np.linalg.eigh(entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    vals = vals[::-1]
    vecs = vecs[:, ::-1]

    n = vals.size
    gaps = vals[:-1] - vals[1:]
    threshold = degeneracy_tol * max(1.0, float(vals[0] - vals[-1]))
    small = gaps < threshold
    for i in range(n - 2):
        if small[i] and small[i + 1]:
            raise TripleDegeneracyError(
                f"eigenvalues {i}..{i + 2} all within {threshold:.3e}; "
                "check the degeneracy tolerance and the input matrix"
            )
    pairs = tuple((i, i + 1) for i in range(n - 1) if small[i])

    vecs = vecs.copy()
    paired = set()
    for (i, j) in pairs:
        paired.update((i, j))
        if reference is not None:
            w1, w2 = _align_pair_to_reference(
                vecs[:, i], vecs[:, j], reference[:, i], reference[:, j]
            )
        else:
            w1, w2 = _canonical_pair_basis(vecs[:, i], vecs[:, j])
        vecs[:, i], vecs[:, j] = w1, w2
    for i in range(n):
        if i not in paired:
            if reference is not None and float(reference[:, i] @ vecs[:, i]) < 0:
                vecs[:, i] = -vecs[:, i]
            elif reference is None:
                vecs[:, i] = _canonical_sign(vecs[:, i])

    scale = max(1.0, float(np.abs(vals).max()))
    residual = np.max(np.abs(entries @ vecs - vecs * vals))
    ortho = np.max(np.abs(vecs.T @ vecs - np.eye(n)))
    if residual > 1e-10 * scale or ortho > 1e-10:
        raise EigensolverError(
            f"eigen residual {residual:.3e} or orthonormality defect {ortho:.3e} "
            "exceeds the 1e-10 bound"
        )
    return SpectralData(vals, vecs, gaps, pairs, sgn)


def interlacing_chain(n: int) -> list[tuple[str, int]]:
    """Merged descending order of the two spectra.

    Entries are ("L", i) or ("B", i) with 0-indexed positions; consecutive
    same-matrix entries may be equal (the allowed degeneracies), entries of
    different matrices are strictly ordered.
    """
    chain: list[tuple[str, int]] = [("L", 0)]
    i_lam, i_bar = 1, 0
    take_bar = True
    while i_lam < n or i_bar < n:
        if take_bar:
            for _ in range(2):
                if i_bar < n:
                    chain.append(("B", i_bar))
                    i_bar += 1
        else:
            for _ in range(2):
                if i_lam < n:
                    chain.append(("L", i_lam))
                    i_lam += 1
        take_bar = not take_bar
    return chain


@dataclass(frozen=True)
class InterlacingReport:
    n: int
    violations: tuple[str, ...]
    min_strict_margin: float
    max_weak_overshoot: float

    @property
    def passed(self) -> bool:
        return not self.violations


def interlacing_check(z: PhasePoint, tol: float = 1e-12) -> InterlacingReport:
    """Verify the alternating eigenvalue chain of L and Lbar.

    The merged descending sequence interleaves strictly between the two
    matrices and weakly inside them, so that the only possible degeneracies
    are within same-matrix adjacent pairs.
    """
    n = z.n
    lam = np.sort(np.linalg.eigvalsh(build_lax(z).entries))[::-1]
    bar = np.sort(np.linalg.eigvalsh(build_lax(z, SignVector.odd(n)).entries))[::-1]
    scale = max(1.0, float(lam[0] - lam[-1]))
    chain = interlacing_chain(n)
    spectra = {"L": lam, "B": bar}

    violations = []
    min_strict = np.inf
    max_weak = 0.0
    for (ta, ia), (tb, ib) in zip(chain[:-1], chain[1:]):
        a, b = spectra[ta][ia], spectra[tb][ib]
        if ta == tb:
            overshoot = b - a
            max_weak = max(max_weak, overshoot)
            if overshoot > tol * scale:
                violations.append(f"{ta}[{ia}] >= {tb}[{ib}] violated by {overshoot:.3e}")
        else:
            margin = a - b
            min_strict = min(min_strict, margin)
            if margin < tol * scale:
                violations.append(f"{ta}[{ia}] > {tb}[{ib}] violated, margin {margin:.3e}")
    return InterlacingReport(n, tuple(violations), float(min_strict), float(max_weak))


@dataclass(frozen=True)
class FrozenFrame:
    """Eigenbasis of one Lax class frozen at a base point.

    ``pairs`` records the 0-indexed positions of the tracked 2x2 blocks;
    they need not be below the degeneracy threshold (the singularity finder
    tracks pairs it is still driving together).
    """

    base: PhasePoint
    sign: SignVector
    values: np.ndarray
    vectors: np.ndarray
    pairs: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return self.values.size


def freeze_frame(
    z: PhasePoint,
    sign: SignVector,
    pairs: tuple[tuple[int, int], ...] | None = None,
    degeneracy_tol: float = DEGENERACY_TOL,
    reference: np.ndarray | None = None,
) -> FrozenFrame:
    """Freeze the eigenbasis of L^sign(z), tracking the given block positions."""
    spec = decompose(build_lax(z, sign), degeneracy_tol, reference=reference)
    if pairs is None:
        pairs = spec.degenerate_pairs
    else:
        pairs = tuple(tuple(p) for p in pairs)
        flagged = set(spec.degenerate_pairs)
        vecs = spec.vectors.copy()
        for p in pairs:
            if p not in flagged:
                # near-degenerate tracked block: canonicalise it the same way
                if reference is not None:
                    w1, w2 = _align_pair_to_reference(
                        vecs[:, p[0]], vecs[:, p[1]], reference[:, p[0]], reference[:, p[1]]
                    )
                else:
                    w1, w2 = _canonical_pair_basis(vecs[:, p[0]], vecs[:, p[1]])
                vecs[:, p[0]], vecs[:, p[1]] = w1, w2
        spec = SpectralData(spec.values, vecs, spec.gaps, spec.degenerate_pairs, spec.sign)
    return FrozenFrame(z, sign, spec.values, spec.vectors, pairs)


def _pair_overlap(frame: FrozenFrame, current: np.ndarray, pair: tuple[int, int]) -> float:
    i, j = pair
    M = frame.vectors[:, [i, j]].T @ current[:, [i, j]]
    return float(np.linalg.svd(M, compute_uv=False)[-1])


@dataclass(frozen=True)
class BlockCoordinates:
    """Local 2x2-block coordinates of both Lax classes in frozen frames.

    Per tracked pair: xi is half the diagonal difference, eta the
    off-diagonal element and tau half the diagonal sum of the block of the
    current Lax matrix expressed in the base point's eigenbasis.  All xi and
    eta vanish at the base point, where tau equals the degenerate eigenvalue.
    """

    point: PhasePoint
    xi: np.ndarray
    eta: np.ndarray
    tau: np.ndarray
    xibar: np.ndarray
    etabar: np.ndarray
    taubar: np.ndarray
    overlaps: np.ndarray
    overlaps_bar: np.ndarray


def _block_values(frame: FrozenFrame, entries: np.ndarray):
    xi = np.empty(len(frame.pairs))
    eta = np.empty(len(frame.pairs))
    tau = np.empty(len(frame.pairs))
    for k, (i, j) in enumerate(frame.pairs):
        u1, u2 = frame.vectors[:, i], frame.vectors[:, j]
        a = float(u1 @ entries @ u1)
        d = float(u2 @ entries @ u2)
        xi[k] = 0.5 * (d - a)
        eta[k] = float(u1 @ entries @ u2)
        tau[k] = 0.5 * (d + a)
    return xi, eta, tau


def block_coordinates(
    z: PhasePoint,
    even_frame: FrozenFrame,
    odd_frame: FrozenFrame,
    min_overlap: float = 0.9,
    check_overlap: bool = True,
) -> BlockCoordinates:
    """Evaluate the frozen-frame block coordinates of both classes at z.

    Raises FrameValidityError when the current eigenspace of any tracked
    pair overlaps its frozen counterpart with smallest principal cosine
    below ``min_overlap``.
    """
    out = {}
    for tag, frame in (("even", even_frame), ("odd", odd_frame)):
        entries = build_lax(z, frame.sign).entries
        overlaps = np.ones(len(frame.pairs))
        if check_overlap and frame.pairs:
            vals, vecs = np.linalg.eigh(entries)
            vecs = vecs[:, ::-1]
            for k, pair in enumerate(frame.pairs):
                overlaps[k] = _pair_overlap(frame, vecs, pair)
                if overlaps[k] < min_overlap:
                    raise FrameValidityError(
                        f"{tag} pair {pair}: eigenspace overlap {overlaps[k]:.3f} "
                        f"below {min_overlap}"
                    )
        out[tag] = (_block_values(frame, entries), overlaps)
    (xi, eta, tau), ov = out["even"]
    (xibar, etabar, taubar), ovb = out["odd"]
    return BlockCoordinates(z, xi, eta, tau, xibar, etabar, taubar, ov, ovb)


@dataclass(frozen=True)
class AnnihilatorPolynomial:
    """det(L* - xI)/(lambda_r - x) expanded in powers of x.

    ``coefficients[k]`` multiplies x^k.  The polynomial vanishes on the whole
    spectrum of L*, its derivative vanishes at every other degenerate
    eigenvalue, and the derivative at lambda_r itself is nonzero.
    """

    coefficients: np.ndarray
    pair_index: int
    root: float
    derivative_at_root: float

    def __call__(self, x: float) -> float:
        return float(np.polyval(self.coefficients[::-1], x))

    def derivative(self, x: float) -> float:
        return float(np.polyval(np.polyder(self.coefficients[::-1]), x))


def annihilator(spec: SpectralData, pair_index: int) -> AnnihilatorPolynomial:
    """Annihilating polynomial of the matrix for one degenerate pair.

    Built from the eigenvalue multiset with one copy of the pair's value
    removed, so the pair eigenvalue stays a simple root.
    """
    if not 0 <= pair_index < len(spec.degenerate_pairs):
        raise ValueError(
            f"pair index {pair_index} not among {len(spec.degenerate_pairs)} degenerate pairs"
        )
    pair = spec.degenerate_pairs[pair_index]
    root = spec.pair_value(pair)
    values = list(spec.values)
    values.pop(pair[0])
    n = spec.n
    monic = np.poly(values)  # highest power first
    coeffs = ((-1.0) ** (n + 1)) * monic
    deriv = float(np.polyval(np.polyder(coeffs), root))
    return AnnihilatorPolynomial(coeffs[::-1].copy(), pair_index, root, deriv)
