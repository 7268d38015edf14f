# Local stability: trajectory recovery, SRC profiles, postselection and dressed recovery

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.config import Config
from utils.exceptions import (
    BadRegion,
    NotLocallyReversible,
    ParamsOutOfRange,
    SupportMismatch,
    TooFewSamples,
)

from .channels import (
    ChannelMap,
    ChannelSequence,
    KrausInstrument,
    TrajectoryEnsemble,
    apply_instrument,
    complete_to_channel,
    depolarizing_channel,
    identity_channel,
    stitch_then_recover,
    unitary_channel,
)
from .correlators import connected_correlator, operator_correlation
from .fitting import DecayFit, fit_log_decay
from .info import Fact2Bounds, conditional_mutual_information, fact2_cmi_bounds
from .linalg import as_cmatrix, psd_sqrt
from .states import (
    DensityMatrix,
    Region,
    RegionPartition,
    Register,
    Sites,
    apply_local_kraus,
    operator_trace_distance,
    site_labels,
)

logger = logging.getLogger(__name__)

Recovery = Union[ChannelMap, ChannelSequence]


# -- geometry ---------------------------------------------------------------------


def buffer_partition(register: Register, A: Sites, r1: int, r2: int) -> RegionPartition:
    """
    Annular buffers around A: B1 within distance r1, B2 within r1 + r2

    Args:
        register: Register with lattice coordinates
        A: Central region
        r1: Width of the inner buffer
        r2: Width of the outer buffer

    Returns:
        RegionPartition: Regions A, B1, B2, C
    """
    a = site_labels(A)
    if not a:
        raise BadRegion("the central region must be nonempty")
    if r1 < 0 or r2 < 0:
        raise ParamsOutOfRange(f"buffer widths ({r1}, {r2}) must be nonnegative")
    B1, B2, C = [], [], []
    for label in register.labels:
        if label in a:
            continue
        d = register.region_distance([label], a)
        if d <= r1:
            B1.append(label)
        elif d <= r1 + r2:
            B2.append(label)
        else:
            C.append(label)
    return RegionPartition.from_sites(register, {"A": a, "B1": B1, "B2": B2, "C": C})


def default_split(r: int, eta: Optional[float] = None, zeta: Optional[float] = None) -> Tuple[int, int]:
    """
    Split a buffer radius so both decay terms shrink at the same rate

    r1 = ceil(eta r / (eta + 2 zeta)) when both lengths are usable, otherwise
    ceil(r / 2).

    Args:
        r: Total buffer radius
        eta: Correlation length
        zeta: Markov length

    Returns:
        Tuple[int, int]: (r1, r2) with r1 + r2 = r
    """
    if r < 0:
        raise ParamsOutOfRange(f"buffer radius {r} must be nonnegative")
    usable = all(x is not None and np.isfinite(x) and x > 0 for x in (eta, zeta))
    if usable:
        r1 = math.ceil(eta * r / (eta + 2.0 * zeta))
    else:
        r1 = math.ceil(r / 2)
    r1 = min(max(r1, 0), r)
    return r1, r - r1


def sublinear_split(r: int, D: int, alpha: float = 1.0) -> Tuple[int, int]:
    """r1 = ceil((alpha r)^{1/D}) for D-dimensional lattices where the buffer volume matters"""
    if r < 0 or D < 1 or alpha <= 0:
        raise ParamsOutOfRange(f"invalid sublinear split r={r}, D={D}, alpha={alpha}")
    r1 = min(math.ceil((alpha * r) ** (1.0 / D)), r)
    return r1, r - r1


def _radii(register: Register, part: RegionPartition) -> Tuple[int, int]:
    """(r1, r) read off an A, B1, B2 partition"""
    A = part["A"].sites

    def reach(sites):
        return max((register.region_distance([x], A) for x in sites), default=0)

    r1 = reach(part["B1"].sites)
    return r1, max(r1, reach(part["B1"].sites + part["B2"].sites))


# -- trajectory recovery ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """
    Recovery errors of one instrument on one region

    Weights are the outcome probabilities conditioned on the recorded
    outcomes, so postselections are scored on their surviving trajectory.
    """

    region: Tuple[int, ...]
    r: int
    r1: int
    r2: int
    trajectory_error: float
    channel_error: float
    outcome_errors: Tuple[float, ...]
    weights: Tuple[float, ...]
    partition: Optional[RegionPartition] = None
    xi: float = float("nan")

    @property
    def split(self) -> Tuple[int, int]:
        return self.r1, self.r2

    def as_dict(self) -> dict:
        return {
            "region": list(self.region),
            "r": self.r,
            "r1": self.r1,
            "r2": self.r2,
            "trajectory_error": self.trajectory_error,
            "channel_error": self.channel_error,
            "outcome_errors": list(self.outcome_errors),
            "weights": list(self.weights),
            "xi": self.xi,
        }


def _recovered(recovery: Recovery, sigma: DensityMatrix) -> np.ndarray:
    """Normalized R(sigma); the zero operator when R annihilates sigma"""
    out = recovery.apply_matrix(sigma.register, sigma.matrix)
    out = (out + out.conj().T) / 2
    trace = float(np.trace(out).real)
    if trace <= Config.SUPPORT_TOL:
        return np.zeros_like(out)
    return out / trace


def _score(rho: DensityMatrix, ensemble: TrajectoryEnsemble, recovery: Recovery):
    weights = np.asarray(ensemble.probabilities, dtype=float)
    weights = weights / weights.sum()
    errors, average = [], np.zeros_like(rho.matrix)
    for w, (_, sigma) in zip(weights, ensemble):
        out = _recovered(recovery, sigma)
        errors.append(operator_trace_distance(out, rho.matrix))
        average = average + w * out
    trajectory = float(np.dot(weights, errors))
    channel = operator_trace_distance(average, rho.matrix)
    return trajectory, channel, tuple(errors), tuple(float(w) for w in weights)


def _check_inside(inst: KrausInstrument, region: Region) -> None:
    if not set(inst.support.sites) <= set(region.sites):
        raise SupportMismatch(f"instrument support {inst.support.sites} is not inside A={region.sites}")


def stability_score(rho: DensityMatrix, inst: KrausInstrument, part: RegionPartition,
                    t: float = 0.0) -> StabilityReport:
    """
    Score the buffered recovery R = P o Tr_{AB1} against every trajectory of an instrument

    Args:
        rho: State on the partitioned register
        inst: Instrument supported in A
        part: Partition with regions A, B1, B2, C
        t: Petz rotation parameter

    Returns:
        StabilityReport: sum_k p_k ||R(sigma_k) - rho||_1 and ||R(Phi(rho)) - rho||_1
    """
    part.require("A", "B1", "B2", "C")
    _check_inside(inst, part["A"])
    recovery = stitch_then_recover(rho, part, t)
    ensemble = apply_instrument(rho, inst)
    trajectory, channel, errors, weights = _score(rho, ensemble, recovery)
    r1, r = _radii(rho.register, part)
    logger.debug("stability A=%s r=%d r1=%d: trajectory %.3e channel %.3e",
                 part["A"].sites, r, r1, trajectory, channel)
    return StabilityReport(part["A"].sites, r, r1, r - r1, trajectory, channel,
                           errors, weights, part)


def best_rotation_score(rho: DensityMatrix, inst: KrausInstrument, part: RegionPartition,
                        t_grid: Sequence[float] = tuple(np.linspace(-2.0, 2.0, 21))) -> StabilityReport:
    """Smallest trajectory error over rotated Petz recoveries"""
    reports = [stability_score(rho, inst, part, float(t)) for t in t_grid]
    return min(reports, key=lambda report: report.trajectory_error)


# -- SRC profile --------------------------------------------------------------------


@dataclass(frozen=True)
class ChainGeometry:
    """
    Separations measured from an anchor site

    For separation r the far region is every site at distance >= r (tail)
    or exactly r, and the buffer is everything strictly closer.
    """

    anchor: Optional[int] = None
    separations: Optional[Tuple[int, ...]] = None
    tail: bool = True

    def regions(self, register: Register) -> List[Tuple[int, Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]]:
        anchor = register.labels[0] if self.anchor is None else self.anchor
        distances = {x: register.distance(anchor, x) for x in register.labels}
        separations = self.separations
        if separations is None:
            separations = tuple(range(1, max(distances.values()) + 1))
        out = []
        for r in separations:
            if self.tail:
                far = tuple(x for x, d in distances.items() if d >= r)
            else:
                far = tuple(x for x, d in distances.items() if d == r)
            near = tuple(x for x, d in distances.items() if 0 < d < r)
            if far:
                out.append((int(r), (anchor,), near, far))
        return out


@dataclass(frozen=True, eq=False)
class SRCProfile:
    """Correlation and CMI decay around an anchor with their exponential fits"""

    samples: Tuple[Tuple[int, float, float], ...]
    correlation_fit: DecayFit
    cmi_fit: DecayFit

    @property
    def eta(self) -> float:
        return self.correlation_fit.length

    @property
    def zeta(self) -> float:
        return self.cmi_fit.length

    @property
    def f_hat(self) -> float:
        return self.correlation_fit.prefactor

    @property
    def g_hat(self) -> float:
        return self.cmi_fit.prefactor

    @property
    def separations(self) -> Tuple[int, ...]:
        return tuple(s[0] for s in self.samples)

    def as_dict(self) -> dict:
        return {
            "samples": [list(s) for s in self.samples],
            "eta": self.eta,
            "zeta": self.zeta,
            "f_hat": self.f_hat,
            "g_hat": self.g_hat,
            "correlation_flag": self.correlation_fit.flag,
            "cmi_flag": self.cmi_fit.flag,
            "correlation_residuals": list(self.correlation_fit.residuals),
            "cmi_residuals": list(self.cmi_fit.residuals),
        }


def src_profile(rho: DensityMatrix, geometry: ChainGeometry = ChainGeometry(),
                restarts: int = Config.CORRELATION_RESTARTS,
                seed: Optional[int] = None) -> SRCProfile:
    """
    Measure operator correlation and CMI against separation and fit their decay

    Args:
        rho: State
        geometry: Anchor and separations
        restarts: Restarts of the correlation-norm ascent
        seed: Seed for the ascent starting points

    Returns:
        SRCProfile: Samples (r, correlation, cmi) with the eta and zeta fits
    """
    regions = geometry.regions(rho.register)
    if len(regions) < Config.FIT_MIN_POINTS:
        raise TooFewSamples(f"{len(regions)} separations, at least {Config.FIT_MIN_POINTS} needed")

    samples = []
    for r, A, B, C in regions:
        corr = operator_correlation(rho, A, C, restarts=restarts, seed=seed).value
        cmi = conditional_mutual_information(rho, A, C, B)
        samples.append((r, float(corr), float(max(cmi, 0.0))))
        logger.debug("src r=%d correlation=%.3e cmi=%.3e", r, corr, cmi)

    rs = [s[0] for s in samples]
    correlation_fit = fit_log_decay(rs, [s[1] for s in samples])
    cmi_fit = fit_log_decay(rs, [s[2] for s in samples])
    return SRCProfile(tuple(samples), correlation_fit, cmi_fit)


# -- postselection ------------------------------------------------------------------


ChannelFactory = Callable[[int, np.ndarray, DensityMatrix], Recovery]


@dataclass(frozen=True, eq=False)
class PostselectionReport:
    """Per-outcome local channels Phi_k with ||Phi_k(rho) - sigma_k||_1"""

    channels: Tuple[Recovery, ...]
    kraus_indices: Tuple[int, ...]
    errors: Tuple[float, ...]
    weights: Tuple[float, ...]

    @property
    def averaged_error(self) -> float:
        return float(np.dot(self.weights, self.errors))


def implement_postselection(rho: DensityMatrix, inst: KrausInstrument, part: RegionPartition,
                            channel_factory: Optional[ChannelFactory] = None) -> PostselectionReport:
    """
    Try to produce each trajectory sigma_k from rho with a channel on A B1 B2

    By default Phi_k traces out A B1 and regenerates it with the Petz map of
    sigma_k reading B2. A factory (k, F_k, sigma_k) -> channel overrides this.

    Args:
        rho: State on the partitioned register
        inst: Instrument supported in A
        part: Partition with regions A, B1, B2, C
        channel_factory: Optional explicit channel per outcome

    Returns:
        PostselectionReport: Channels, errors and conditional weights
    """
    part.require("A", "B1", "B2", "C")
    _check_inside(inst, part["A"])
    ensemble = apply_instrument(rho, inst)
    weights = np.asarray(ensemble.probabilities, dtype=float)
    weights = weights / weights.sum()

    channels, errors = [], []
    for k, sigma in zip(ensemble.kraus_indices, ensemble.states):
        if channel_factory is None:
            channel = stitch_then_recover(sigma, part)
        else:
            channel = channel_factory(k, inst.kraus_ops[k], sigma)
        out = _recovered(channel, rho)
        channels.append(channel)
        errors.append(operator_trace_distance(out, sigma.matrix))
    logger.debug("postselection errors %s", ["%.3e" % e for e in errors])
    return PostselectionReport(tuple(channels), ensemble.kraus_indices, tuple(errors),
                               tuple(float(w) for w in weights))


# -- locally reversible circuits -----------------------------------------------------


Layer = Tuple[ChannelMap, ...]


@dataclass(frozen=True, eq=False)
class CircuitPair:
    """
    Forward layers F_1..F_T and reverse layers D_1..D_T of local gates

    Gate l of reverse layer t has the support of gate l of forward layer t.
    F_1 is applied first; D = D_1 o ... o D_T applies D_T first.
    """

    forward: Tuple[Layer, ...]
    reverse: Tuple[Layer, ...]

    def __post_init__(self):
        forward = tuple(tuple(layer) for layer in self.forward)
        reverse = tuple(tuple(layer) for layer in self.reverse)
        if len(forward) != len(reverse):
            raise SupportMismatch(f"{len(forward)} forward layers against {len(reverse)} reverse layers")
        for t, (f_layer, d_layer) in enumerate(zip(forward, reverse), start=1):
            if len(f_layer) != len(d_layer):
                raise SupportMismatch(f"layer {t} has unpaired gates")
            for F, D in zip(f_layer, d_layer):
                if set(F.support.sites) != set(D.support.sites):
                    raise SupportMismatch(
                        f"layer {t}: gate on {F.support.sites} paired with {D.support.sites}"
                    )
        object.__setattr__(self, "forward", forward)
        object.__setattr__(self, "reverse", reverse)

    @property
    def depth(self) -> int:
        return len(self.forward)

    @classmethod
    def trivial(cls, register: Register, depth: int = 1) -> "CircuitPair":
        layer = tuple(identity_channel(register.region([x])) for x in register.labels)
        return cls((layer,) * depth, (layer,) * depth)

    @classmethod
    def unitary(cls, layers: Sequence[Sequence[Tuple[Sites, np.ndarray]]], register: Register) -> "CircuitPair":
        """Forward unitaries (sites, U) per layer, reversed by their adjoints"""
        forward, reverse = [], []
        for layer in layers:
            forward.append(tuple(unitary_channel(U, register.region(s)) for s, U in layer))
            reverse.append(tuple(unitary_channel(as_cmatrix(U).conj().T, register.region(s)) for s, U in layer))
        return cls(tuple(forward), tuple(reverse))

    def apply_forward(self, rho: DensityMatrix) -> DensityMatrix:
        M = rho.matrix
        for layer in self.forward:
            for gate in layer:
                M = gate.apply_matrix(rho.register, M)
        return DensityMatrix.from_operator(rho.register, M)

    def reversibility_defects(self, rho: DensityMatrix) -> List[Tuple[int, int, float]]:
        """||D_{t,l} F_{t,l}(rho_{t-1}) - rho_{t-1}||_1 with rho_{t-1} = F_{t-1}...F_1(rho)"""
        register, M = rho.register, rho.matrix
        defects = []
        for t, (f_layer, d_layer) in enumerate(zip(self.forward, self.reverse), start=1):
            for l, (F, D) in enumerate(zip(f_layer, d_layer)):
                back = D.apply_matrix(register, F.apply_matrix(register, M))
                defects.append((t, l, operator_trace_distance(back, M)))
            for gate in f_layer:
                M = gate.apply_matrix(register, M)
        return defects

    def validate(self, rho: DensityMatrix, tol: float = Config.REVERSIBILITY_TOL) -> float:
        """Largest gatewise defect; raises NotLocallyReversible above tol"""
        defects = self.reversibility_defects(rho)
        worst = max(defects, key=lambda d: d[2], default=(0, 0, 0.0))
        if worst[2] > tol:
            raise NotLocallyReversible(
                f"gate {worst[1]} of layer {worst[0]} is not reversed on this state: defect {worst[2]:.3e}"
            )
        return worst[2]


def _cone(layers: Sequence[Layer], sites: Sequence[int]) -> Tuple[Tuple[int, ...], List[List[ChannelMap]]]:
    """Grow a site set through layers in the given order, collecting the gates it touches"""
    grown = set(sites)
    picked = []
    for layer in layers:
        hit = [gate for gate in layer if not grown.isdisjoint(gate.support.sites)]
        for gate in hit:
            grown.update(gate.support.sites)
        picked.append(hit)
    return tuple(sorted(grown)), picked


def dressed_recovery(rho: DensityMatrix, circuit: CircuitPair, inst: KrausInstrument, r: int,
                     split: Optional[Tuple[int, int]] = None, t: float = 0.0) -> StabilityReport:
    """
    Recovery for rho' = F(rho) built from a recovery of rho

    The base recovery R of rho protects the light cone of A; it is dressed as
    R' = F_{R up} o R o D_{R down}, keeping only the gates inside the light
    cone of supp(R).

    Args:
        rho: Reference state
        circuit: Gatewise reversible pair on rho
        inst: Instrument on A, applied to rho'
        r: Buffer radius of the base recovery
        split: (r1, r2), ceil(r / 2) by default
        t: Petz rotation parameter

    Returns:
        StabilityReport: Errors of R' on rho' (partition is the base partition)
    """
    if circuit.depth > Config.MAX_CIRCUIT_DEPTH:
        raise ParamsOutOfRange(f"circuit depth {circuit.depth} above {Config.MAX_CIRCUIT_DEPTH}")
    circuit.validate(rho)
    register = rho.register
    rho_prime = circuit.apply_forward(rho)

    a = inst.support.sites
    protected, _ = _cone(circuit.forward[::-1], a)
    r1, r2 = split if split is not None else default_split(r)
    part = buffer_partition(register, protected, r1, r2)
    base = stitch_then_recover(rho, part, t)

    support = part.union("A", "B1", "B2").sites
    _, down = _cone(circuit.reverse, support)
    _, up = _cone(circuit.forward, support)
    before = [gate for hit in down[::-1] for gate in hit]
    after = [gate for hit in up for gate in hit]
    dressed = ChannelSequence(tuple(before) + (base,) + tuple(after))

    ensemble = apply_instrument(rho_prime, inst)
    trajectory, channel, errors, weights = _score(rho_prime, ensemble, dressed)
    logger.debug("dressed recovery on %s (%d + %d gates): trajectory %.3e",
                 dressed.support_sites, len(before), len(after), trajectory)
    return StabilityReport(tuple(a), r1 + r2, r1, r2, trajectory, channel, errors, weights, part)


# -- consequences of stability ---------------------------------------------------------


@dataclass(frozen=True)
class CorrelationBound:
    """|<P O_C> - <P><O_C>| against ||R(sqrt(P) rho sqrt(P)) - <P> rho||_1"""

    connected: float
    recovery_error: float

    @property
    def holds(self) -> bool:
        return self.connected <= self.recovery_error + 1e-9


def recovery_correlation_bound(rho: DensityMatrix, O_A: np.ndarray, O_C: np.ndarray,
                               part: RegionPartition, t: float = 0.0) -> CorrelationBound:
    """
    Correlation across the buffer bounded by one unnormalized trajectory error

    A Hermitian O_A is shifted and scaled into 0 <= P <= 1, and O_C scaled to
    unit norm; the returned connected correlator is the one of (P, O_C).

    Args:
        rho: State on the partitioned register
        O_A: Hermitian operator on A
        O_C: Operator on C
        part: Partition with regions A, B1, B2, C
        t: Petz rotation parameter

    Returns:
        CorrelationBound: Both sides of the inequality
    """
    part.require("A", "B1", "B2", "C")
    if part["C"].is_empty:
        raise BadRegion("region C must be nonempty")
    O = as_cmatrix(O_A)
    O = (O + O.conj().T) / 2
    norm = float(np.linalg.norm(O, 2)) or 1.0
    P = (O + norm * np.eye(O.shape[0])) / (2.0 * norm)
    O_C = as_cmatrix(O_C)
    O_C = O_C / (float(np.linalg.norm(O_C, 2)) or 1.0)

    inst = complete_to_channel(psd_sqrt(P), part["A"])
    recovery = stitch_then_recover(rho, part, t)
    positions = rho.register.positions(part["A"].sites)
    branch = apply_local_kraus(rho.matrix, rho.register.site_dims, positions, [inst.kraus_ops[0]])
    out = recovery.apply_matrix(rho.register, branch)
    error = operator_trace_distance(out, rho.expectation(P, part["A"].sites).real * rho.matrix)
    connected = abs(connected_correlator(rho, P, part["A"].sites, O_C, part["C"].sites))
    return CorrelationBound(float(connected), float(error))


@dataclass(frozen=True, eq=False)
class DepolarizeRecoverCheck:
    """I(A:C|B) of rho against the bound implied by the depolarize-and-recover error"""

    cmi: float
    recovered_cmi: float   # reported, not bounded
    delta: float
    bounds: Fact2Bounds

    @property
    def holds(self) -> bool:
        return self.cmi <= self.bounds.bound1 + 1e-9


def depolarize_recover_cmi_check(rho: DensityMatrix, part: RegionPartition,
                                 t: float = 0.0) -> DepolarizeRecoverCheck:
    """
    Depolarize A, recover from B, and compare I(A:C|B) with the implied bounds

    Args:
        rho: State on the partitioned register
        part: Partition with regions A, B, C
        t: Petz rotation parameter

    Returns:
        DepolarizeRecoverCheck: Both CMIs, the recovery error and the bounds
    """
    part.require("A", "B", "C")
    A, B, C = part["A"], part["B"], part["C"]
    buffered = RegionPartition.from_sites(rho.register, {
        "A": A.sites, "B1": (), "B2": B.sites, "C": C.sites,
    })
    depolarize = depolarizing_channel(A)
    recovery = ChannelSequence((depolarize, stitch_then_recover(rho, buffered, t)))
    recovered = recovery.apply(rho, renormalize=True)
    delta = min(operator_trace_distance(recovered.matrix, rho.matrix), 2.0)

    cmi = conditional_mutual_information(rho, A, C, B)
    recovered_cmi = conditional_mutual_information(recovered, A, C, B)
    bounds = fact2_cmi_bounds(delta, A.dim * B.dim, max(C.dim, 1), B.dim)
    logger.debug("depolarize-recover delta=%.3e cmi=%.3e bound=%.3e", delta, cmi, bounds.bound1)
    return DepolarizeRecoverCheck(float(cmi), float(recovered_cmi), float(delta), bounds)
