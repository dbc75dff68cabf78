"""Eigenvector holonomies and Maslov indices along closed curves.

On the regular set the Hamiltonian vector fields of the n conserved traces
span a Lagrangian plane; identifying the plane with the unitary part of
its complex frame makes the squared determinant well defined, and the
winding of its argument around a closed curve is the Maslov index (up to
one global orientation constant pinned by the harmonic-oscillator angle
loop).  Independently, each normalized real eigenvector of either Lax
matrix returns to plus or minus itself after continuation around the
curve; the product of the even-indexed holonomy signs over both matrices
reproduces (-1)^(mu/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
import numpy as np

from .lax import PhasePoint, build_lax
from .dynamics import grad_F
from .spectral import DEGENERACY_TOL
from .singularity import (
    PairTarget,
    SingularPoint,
    _class_sign,
    _pair_forms,
    pair_bracket,
    _degenerate_pair_data,
)

__all__ = [
    "CALIBRATION_SIGN",
    "RegularityError",
    "TransportError",
    "LagrangianFrameError",
    "ClosedCurve",
    "HolonomyResult",
    "transport_eigenvectors",
    "MaslovResult",
    "toda_frame",
    "oscillator_frame",
    "oscillator_angle_loop",
    "maslov_index",
    "HolonomyTheoremReport",
    "check_holonomy_theorem",
    "DiskSpec",
    "EnclosureReport",
    "enclosure_count_check",
]

# Orientation of the winding fixed once against the harmonic-oscillator
# angle loop, whose Maslov index is 2 by the semiclassical normalisation.
CALIBRATION_SIGN = -1


class RegularityError(RuntimeError):
    """A curve sample is too close to an eigenvalue degeneracy."""


class TransportError(RuntimeError):
    """Continuation failed to keep eigenvector overlap above threshold."""


class LagrangianFrameError(RuntimeError):
    """The complex frame lost rank; the point cannot be regular."""


@dataclass(frozen=True)
class ClosedCurve:
    """A parameterized loop t in [0, 1] in phase space.

    ``point_at`` must satisfy point_at(0) = point_at(1).  Transport and
    winding computations start from ``initial_samples`` equal subintervals
    and subdivide adaptively.
    """

    point_at: Callable[[float], PhasePoint]
    initial_samples: int = 256

    def __post_init__(self):
        z0, z1 = self.point_at(0.0), self.point_at(1.0)
        gap = float(np.max(np.abs(z0.as_vector() - z1.as_vector())))
        if gap > 1e-12:
            raise ValueError(f"curve is not closed: endpoint mismatch {gap:.3e}")

    def reversed(self) -> "ClosedCurve":
        inner = self.point_at
        return ClosedCurve(lambda t: inner(1.0 - t), self.initial_samples)

    def refined(self, factor: int = 2) -> "ClosedCurve":
        return ClosedCurve(self.point_at, self.initial_samples * factor)

    @staticmethod
    def from_samples(points: list[PhasePoint], initial_samples: int | None = None) -> "ClosedCurve":
        """Piecewise-linear loop through the given points (last equals first)."""
        if len(points) < 3:
            raise ValueError("need at least three samples")
        closure = float(
            np.max(np.abs(points[0].as_vector() - points[-1].as_vector()))
        )
        if closure > 1e-12:
            raise ValueError(f"sample list does not close: gap {closure:.3e}")
        Z = np.array([pt.as_vector() for pt in points])
        m = len(points) - 1

        def at(t: float) -> PhasePoint:
            s = min(max(t, 0.0), 1.0) * m
            k = min(int(np.floor(s)), m - 1)
            w = s - k
            return PhasePoint.from_vector((1.0 - w) * Z[k] + w * Z[k + 1])

        return ClosedCurve(at, initial_samples or max(2 * m, 64))

    @staticmethod
    def circle(
        center: PhasePoint,
        v1: np.ndarray,
        v2: np.ndarray,
        radius: float,
        initial_samples: int = 256,
        orientation: int = 1,
    ) -> "ClosedCurve":
        """The loop center + radius (cos(2 pi t) v1 + sin(2 pi t) v2)."""
        zc = center.as_vector()
        v1 = np.asarray(v1, float)
        v2 = np.asarray(v2, float)

        def at(t: float) -> PhasePoint:
            a = 2.0 * np.pi * t * orientation
            return PhasePoint.from_vector(zc + radius * (np.cos(a) * v1 + np.sin(a) * v2))

        return ClosedCurve(at, initial_samples)

    @staticmethod
    def around_pair(
        point: SingularPoint | PhasePoint,
        target: PairTarget,
        radius: float = 1e-2,
        initial_samples: int = 256,
        orientation: int = 1,
    ) -> "ClosedCurve":
        """Circle in the dual plane of the (xi, eta) coordinates of one pair."""
        v1, v2 = pair_plane_duals(point, target)
        z = point.z if isinstance(point, SingularPoint) else point
        return ClosedCurve.circle(z, v1, v2, radius, initial_samples, orientation)


def pair_plane_duals(
    point: SingularPoint | PhasePoint, target: PairTarget,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-norm directions v1, v2 with dxi(v1) = deta(v2) = 1 and zero cross terms."""
    z = point.z if isinstance(point, SingularPoint) else point
    _, _, u1, u2, _ = _degenerate_pair_data(z, target, degeneracy_tol)
    dxi, deta, _ = _pair_forms(z, target.odd_class, u1, u2)
    A = np.vstack([dxi, deta])
    duals = A.T @ np.linalg.inv(A @ A.T)
    return duals[:, 0], duals[:, 1]


def _regularity_gap(z: PhasePoint) -> float:
    """Smallest eigenvalue gap of either Lax matrix, relative to the spectral range."""
    worst = np.inf
    for odd in (False, True):
        vals = np.sort(np.linalg.eigvalsh(build_lax(z, _class_sign(z.n, odd)).entries))
        scale = max(1.0, float(vals[-1] - vals[0]))
        worst = min(worst, float(np.min(np.diff(vals))) / scale)
    return worst


def _assert_regular(z: PhasePoint, t: float, tol: float) -> None:
    gap = _regularity_gap(z)
    if gap < tol:
        raise RegularityError(
            f"sample at t = {t:.6f} has eigenvalue gap {gap:.3e} below {tol:.1e}; "
            "the curve passes too close to a singular point"
        )


def _descending_vectors(z: PhasePoint, odd_class: bool) -> np.ndarray:
    entries = build_lax(z, _class_sign(z.n, odd_class)).entries
    _, vecs = np.linalg.eigh(entries)
    return vecs[:, ::-1]


def _transport_class(
    curve: ClosedCurve,
    odd_class: bool,
    min_overlap: float,
    regularity_tol: float,
    max_evaluations: int,
) -> np.ndarray:
    """Continue all eigenvectors of one class around the loop; return the signs."""
    ts = list(np.linspace(0.0, 1.0, curve.initial_samples + 1))
    z0 = curve.point_at(ts[0])
    _assert_regular(z0, 0.0, regularity_tol)
    V0 = _descending_vectors(z0, odd_class)
    V = V0.copy()
    t_curr = ts[0]
    pending = ts[1:]
    evaluations = 0
    while pending:
        t_next = pending[0]
        z = curve.point_at(t_next)
        evaluations += 1
        if evaluations > max_evaluations:
            raise TransportError("transport exceeded the evaluation budget")
        _assert_regular(z, t_next, regularity_tol)
        W = _descending_vectors(z, odd_class)
        overlaps = np.einsum("ij,ij->j", V, W)
        r = int(np.argmin(np.abs(overlaps)))
        if abs(overlaps[r]) <= min_overlap:
            if t_next - t_curr < 1e-10:
                raise TransportError(
                    f"eigenvector {r} overlap {abs(overlaps[r]):.3f} <= {min_overlap} "
                    f"at t = {t_next:.8f} despite maximal refinement"
                )
            pending.insert(0, 0.5 * (t_curr + t_next))
            continue
        V = W * np.sign(overlaps)
        t_curr = t_next
        pending.pop(0)

    final = np.einsum("ij,ij->j", V0, V)
    if np.min(np.abs(final)) < 0.99:
        raise TransportError(
            f"loop closure overlap {np.min(np.abs(final)):.3f} too weak; "
            "transport did not return to the initial eigenspaces"
        )
    return np.sign(final)


@dataclass(frozen=True)
class HolonomyResult:
    """Holonomy signs of all eigenvector bundles around one loop.

    ``even_product`` multiplies the signs at even 1-indexed descending
    positions over both classes, ``odd_product`` the odd positions; the two
    agree because the full products are the trivial determinant holonomy.
    """

    gamma: np.ndarray
    gammabar: np.ndarray

    @property
    def even_product(self) -> int:
        return int(np.prod(self.gamma[1::2]) * np.prod(self.gammabar[1::2]))

    @property
    def odd_product(self) -> int:
        return int(np.prod(self.gamma[0::2]) * np.prod(self.gammabar[0::2]))

    @property
    def full_products(self) -> tuple[int, int]:
        return int(np.prod(self.gamma)), int(np.prod(self.gammabar))


def transport_eigenvectors(
    curve: ClosedCurve,
    min_overlap: float = 0.9,
    regularity_tol: float = DEGENERACY_TOL,
    max_evaluations: int = 200000,
) -> HolonomyResult:
    """Continue the eigenvectors of both Lax matrices around the loop.

    At every step the new eigenvector signs maximise overlap with the
    previous ones; the sampling is bisected wherever the smallest overlap
    drops to ``min_overlap`` or below.
    """
    gamma = _transport_class(curve, False, min_overlap, regularity_tol, max_evaluations)
    gammabar = _transport_class(curve, True, min_overlap, regularity_tol, max_evaluations)
    return HolonomyResult(gamma, gammabar)


def toda_frame(z: PhasePoint) -> np.ndarray:
    """Columns are the Hamiltonian vector fields of the n conserved traces."""
    n = z.n
    X = np.empty((2 * n, n))
    for j in range(1, n + 1):
        g = grad_F(z, j)
        X[:n, j - 1] = g.dp
        X[n:, j - 1] = -g.dq
    return X


def oscillator_frame(z: PhasePoint) -> np.ndarray:
    """Frame of n uncoupled unit harmonic oscillators (calibration system)."""
    n = z.n
    X = np.zeros((2 * n, n))
    for j in range(n):
        X[j, j] = z.p[j]
        X[n + j, j] = -z.q[j]
    return X


def oscillator_angle_loop(n: int, oscillator: int = 0, initial_samples: int = 128) -> ClosedCurve:
    """One period of the first oscillator's flow, the others held at (1, 0)."""

    def at(t: float) -> PhasePoint:
        q = np.ones(n)
        p = np.zeros(n)
        a = 2.0 * np.pi * t
        q[oscillator] = np.cos(a)
        p[oscillator] = -np.sin(a)
        return PhasePoint(q, p)

    return ClosedCurve(at, initial_samples)


@dataclass(frozen=True)
class MaslovResult:
    """Winding number of the Lagrangian plane of the integral flows."""

    mu: int
    winding_trace: np.ndarray  # rows (t, accumulated argument)
    calibration_sign: int


def _unitary_phase(frame: np.ndarray) -> float:
    """Argument of det(U)^2 for the unitary part U of the complex frame."""
    n = frame.shape[1]
    W = frame[:n, :] + 1j * frame[n:, :]
    gram = W.conj().T @ W
    w, Q = np.linalg.eigh(gram)
    if w[0] <= 1e-10:
        raise LagrangianFrameError(
            f"frame Gram matrix smallest eigenvalue {w[0]:.3e} <= 1e-10"
        )
    U = W @ (Q * (w ** -0.5)) @ Q.conj().T
    det = np.linalg.det(U)
    return float(np.angle(det * det))


def _principal(a: float) -> float:
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def maslov_index(
    curve: ClosedCurve,
    frame_fn: Callable[[PhasePoint], np.ndarray] | None = None,
    regularity_tol: float = DEGENERACY_TOL,
    max_evaluations: int = 200000,
    check_regularity: bool | None = None,
) -> MaslovResult:
    """Winding number of the squared determinant of the unitarised frame.

    The continuous argument is accumulated with per-step jumps kept below
    pi/2 by bisection, so the integer winding is unambiguous; the stored
    calibration sign converts it to the Maslov index normalisation in
    which the harmonic-oscillator angle loop scores +2.
    """
    if frame_fn is None:
        frame_fn = toda_frame
    if check_regularity is None:
        check_regularity = frame_fn is toda_frame

    ts = list(np.linspace(0.0, 1.0, curve.initial_samples + 1))
    z0 = curve.point_at(0.0)
    if check_regularity:
        _assert_regular(z0, 0.0, regularity_tol)
    phi_curr = _unitary_phase(frame_fn(z0))
    trace = [(0.0, 0.0)]
    total = 0.0
    t_curr = 0.0
    pending = ts[1:]
    evaluations = 0
    while pending:
        t_next = pending[0]
        z = curve.point_at(t_next)
        evaluations += 1
        if evaluations > max_evaluations:
            raise TransportError("winding accumulation exceeded the evaluation budget")
        if check_regularity:
            _assert_regular(z, t_next, regularity_tol)
        phi_next = _unitary_phase(frame_fn(z))
        step = _principal(phi_next - phi_curr)
        if abs(step) >= 0.5 * np.pi:
            if t_next - t_curr < 1e-10:
                raise TransportError(
                    f"phase jump {step:.3f} at t = {t_next:.8f} despite maximal refinement"
                )
            pending.insert(0, 0.5 * (t_curr + t_next))
            continue
        total += step
        phi_curr = phi_next
        t_curr = t_next
        pending.pop(0)
        trace.append((t_curr, total))

    winding = total / (2.0 * np.pi)
    nearest = int(np.rint(winding))
    if abs(winding - nearest) > 1e-3:
        raise TransportError(f"winding {winding:.6f} is not close to an integer")
    mu = CALIBRATION_SIGN * nearest
    if mu % 2 != 0:
        raise TransportError(
            f"odd winding {mu}; the Lagrangian plane field should be orientable"
        )
    return MaslovResult(mu, np.array(trace), CALIBRATION_SIGN)


@dataclass(frozen=True)
class HolonomyTheoremReport:
    """Both sides of the holonomy identity (-1)^(mu/2) = product of even holonomies."""

    mu: int
    holonomy: HolonomyResult
    lhs: int

    @property
    def agree(self) -> bool:
        return (
            self.lhs == self.holonomy.even_product
            and self.holonomy.even_product == self.holonomy.odd_product
            and self.holonomy.full_products == (1, 1)
        )


def check_holonomy_theorem(curve: ClosedCurve, **kwargs) -> HolonomyTheoremReport:
    """Compute the Maslov index and the holonomies independently and compare."""
    hol = transport_eigenvectors(curve, **kwargs)
    mas = maslov_index(curve)
    lhs = int((-1) ** (mas.mu // 2))
    return HolonomyTheoremReport(mas.mu, hol, lhs)


@dataclass(frozen=True)
class DiskSpec:
    """A small oriented disk around one corank-one singular point.

    The disk is the image of (a, b) -> z* + a v1 + (orientation) b v2 over
    a**2 + b**2 <= radius**2 with (v1, v2) the dual directions of the
    degenerate pair's (xi, eta) plane.
    """

    center: SingularPoint
    radius: float = 1e-2
    orientation: int = 1
    target: PairTarget | None = None

    def pair(self) -> PairTarget:
        return self.target if self.target is not None else self.center.targets[0]


class DiskGeometryError(ValueError):
    """A singular point lies too close to the assembled boundary."""


@dataclass(frozen=True)
class EnclosureReport:
    """Maslov index of a disk boundary against the enclosed transversal signs."""

    mu: int
    sigmas: tuple[int, ...]
    expected: int

    @property
    def passed(self) -> bool:
        return self.mu == self.expected


def _disk_sigma(disk: DiskSpec) -> int:
    """Orientation sign of the projected differential on the (xi, eta) plane.

    The disk map sends the oriented basis of the parameter plane to
    (v1, +-v2), whose (dxi, deta) projection has determinant +-1, and the
    symplectic orientation of the transverse plane is the sign of
    {xi, eta} at the singular point.
    """
    z = disk.center.z
    target = disk.pair()
    _, _, u1, u2, _ = _degenerate_pair_data(z, target, DEGENERACY_TOL)
    return int(disk.orientation * np.sign(pair_bracket(z, target.odd_class, u1, u2)))


def enclosure_count_check(
    disks: list[DiskSpec],
    samples_per_circle: int = 256,
    samples_per_corridor: int = 32,
) -> EnclosureReport:
    """Check that the boundary winding counts the enclosed singular points.

    For several disks the boundary is the chain composition
    C_1 k_1 C_2 k_2 ... reversed corridors, whose corridor contributions
    cancel, so the total index is the sum of the individual disks'.
    Expected value: mu = -2 sum_j sigma_j.
    """
    if not disks:
        raise ValueError("need at least one disk")
    circles = []
    for d in disks:
        v1, v2 = pair_plane_duals(d.center, d.pair())
        zc = d.center.z.as_vector()
        angles = 2.0 * np.pi * np.linspace(0.0, 1.0, samples_per_circle + 1) * d.orientation
        pts = [
            PhasePoint.from_vector(zc + d.radius * (np.cos(a) * v1 + np.sin(a) * v2))
            for a in angles
        ]
        circles.append(pts)

    centers = [d.center.z.as_vector() for d in disks]
    for pts in circles:
        for j, c in enumerate(centers):
            dist = min(float(np.linalg.norm(p.as_vector() - c)) for p in pts)
            if dist < 0.3 * disks[j].radius:
                raise DiskGeometryError(
                    f"singular point {j} lies within {dist:.3e} of the boundary"
                )

    def corridor(a: PhasePoint, b: PhasePoint):
        za, zb = a.as_vector(), b.as_vector()
        return [
            PhasePoint.from_vector(za + s * (zb - za))
            for s in np.linspace(0.0, 1.0, samples_per_corridor + 1)[1:]
        ]

    path = list(circles[0])
    for k in range(1, len(circles)):
        out = corridor(path[-1], circles[k][0])
        path += out
        path += circles[k][1:]
        path += corridor(path[-1], circles[0][0])
    curve = ClosedCurve.from_samples(path)

    mu = maslov_index(curve).mu
    sigmas = tuple(_disk_sigma(d) for d in disks)
    return EnclosureReport(mu, sigmas, -2 * int(np.sum(sigmas)))
