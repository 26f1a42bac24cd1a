"""Exact two-point-measurement statistics and the exponential identities.

The pipeline is: build a :class:`TpmExperiment` (state, first projective
measurement, channel, second projective measurement), derive the exact
joint outcome distribution p(n,m) from the Born rule, then read every
downstream quantity off that table — marginals, conditionals, the
single-trial mutual information I_nm = ln p(m|n) − ln p(m), its
exponential average ⟨e^{−I}⟩ with explicit support-defect bookkeeping,
and the work statistics ⟨e^{−βW}⟩ versus Z'/Z.

Support convention: any cell with p(n,m) ≤ support_epsilon is excluded
from exponential averages, and the excluded probability-product mass is
reported as ``support_defect`` instead of silently producing NaN. The
bookkeeping identity exp_average + support_defect = 1 holds for every
experiment, full support or not; exp_average = 1 exactly when the support
is full.

Sign convention: work is W_nm = E'_m − E_n and dissipation is
β(W_nm − ΔF) with ΔF = F' − F, the convention under which
⟨e^{−dissipation}⟩ = 1 for Gibbs initial states, rank-1 energy bases and
unital evolution. All logarithms are natural (nats).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .quantum import DensityMatrix, KrausChannel, ProjectorFamily

__all__ = [
    "TpmExperiment",
    "JointDistribution",
    "MutualInformationTable",
    "WorkStatistics",
    "joint_distribution",
    "distribution_from_joint",
    "mutual_information_table",
    "exp_average_with_reference",
    "work_statistics",
    "compare_mi_to_dissipation",
]

DEFAULT_SUPPORT_EPSILON = 1e-12
PROBABILITY_BOUND_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
BOOKKEEPING_TOL = 1e-10
JENSEN_TOL = 1e-12


def _trace_product(a: np.ndarray, b: np.ndarray) -> float:
    """Re tr(a @ b) without forming the product matrix."""
    return float(np.einsum("ij,ji->", a, b).real)


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TpmExperiment:
    """One prepare–evolve–measure scenario.

    All four ingredients must share the same Hilbert space dimension.
    """

    initial_state: DensityMatrix
    first_measurement: ProjectorFamily
    channel: KrausChannel
    second_measurement: ProjectorFamily

    def __post_init__(self):
        dims = {
            "initial_state": self.initial_state.dim,
            "first_measurement": self.first_measurement.dim,
            "channel": self.channel.dim,
            "second_measurement": self.second_measurement.dim,
        }
        if len(set(dims.values())) != 1:
            raise ValueError(f"experiment dimensions disagree: {dims}")

    @property
    def dim(self) -> int:
        return self.initial_state.dim


@dataclass(frozen=True)
class JointDistribution:
    """The exact outcome table p(n,m) and everything derived from it.

    Attributes
    ----------
    p_joint : (N, M) array
        Joint outcome probabilities, clamped to [0, 1] after a bound check.
    p_first, p_second : arrays
        Marginals p(n) = Σ_m p(n,m) and p(m) = Σ_n p(n,m). p(m) is the
        marginal *after* the first measurement's dephasing — the true
        marginal of the outcome pair, which is what the mutual information
        is defined against.
    p_cond : (N, M) array
        Conditionals p(m|n); rows with p(n) ≤ support_epsilon are NaN
        (undefined), everywhere else p(n,m) = p(m|n)·p(n) holds by
        construction.
    support_mask : (N, M) bool array
        True where p(n,m) > support_epsilon.
    factorization_residual : float
        max |p(n,m) − tr{Q_m Λ(P_n)}·tr(P_n ρ)|: how far the rank-1
        factorized form of the Born rule is from the exact unfactorized
        one. Zero (to rounding) whenever every first projector is rank-1.
    p_second_direct : array or None
        tr{Q_m Λ(ρ)}, the final-outcome distribution with the first
        measurement skipped. Differs from p_second when ρ carries
        coherences across the first-measurement projectors. None when the
        distribution was built from a raw table.
    """

    p_joint: np.ndarray
    p_first: np.ndarray
    p_second: np.ndarray
    p_cond: np.ndarray
    support_mask: np.ndarray
    support_epsilon: float
    factorization_residual: float
    p_second_direct: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.p_joint.shape

    @property
    def full_support(self) -> bool:
        return bool(self.support_mask.all())


def distribution_from_joint(p_joint, support_epsilon: float = DEFAULT_SUPPORT_EPSILON,
                            factorization_residual: float = 0.0,
                            p_second_direct=None) -> JointDistribution:
    """Build a :class:`JointDistribution` from a raw probability table.

    Checks bounds (entries within [−1e−12, 1 + 1e−12]) before clamping to
    [0, 1], and normalization (Σ p = 1 within 1e−10); fills marginals,
    conditionals and the support mask.
    """
    p = np.array(p_joint, dtype=float)
    if p.ndim != 2:
        raise ValueError(f"joint table must be 2-d, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("joint table contains non-finite entries",
                              invariant="finite_entries")
    low, high = float(p.min()), float(p.max())
    if low < -PROBABILITY_BOUND_TOL or high > 1.0 + PROBABILITY_BOUND_TOL:
        raise ValidationError(
            f"probabilities out of bounds: min {low:.3e}, max {high:.3e}",
            invariant="probability_bounds",
            residual=max(-low, high - 1.0))
    p = np.clip(p, 0.0, 1.0)
    total = float(p.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(
            f"joint table sums to {total!r}, not 1",
            invariant="normalization", residual=abs(total - 1.0))
    p_first = p.sum(axis=1)
    p_second = p.sum(axis=0)
    defined = p_first > support_epsilon
    p_cond = np.full_like(p, np.nan)
    p_cond[defined] = p[defined] / p_first[defined, None]
    mask = p > support_epsilon
    if p_second_direct is not None:
        p_second_direct = _freeze(np.array(p_second_direct, dtype=float))
    return JointDistribution(
        p_joint=_freeze(p), p_first=_freeze(p_first), p_second=_freeze(p_second),
        p_cond=_freeze(p_cond), support_mask=_freeze(mask),
        support_epsilon=float(support_epsilon),
        factorization_residual=float(factorization_residual),
        p_second_direct=p_second_direct)


def joint_distribution(experiment: TpmExperiment,
                       support_epsilon: float = DEFAULT_SUPPORT_EPSILON) -> JointDistribution:
    """Exact joint distribution of a TPM experiment via the Born rule.

    Computes the unfactorized expression
    p(n,m) = tr{Q_m Σ_i Λ_i P_n ρ P_n Λ_i† Q_m}, which is correct for
    projectors of any rank, and reports how far the rank-1 factorized form
    tr{Q_m Λ(P_n)}·tr(P_n ρ) deviates from it (``factorization_residual``).
    """
    rho = experiment.initial_state.matrix
    first = experiment.first_measurement
    second = experiment.second_measurement
    kraus = experiment.channel.kraus_ops
    n_out, m_out = len(first), len(second)

    p = np.zeros((n_out, m_out))
    p_factorized = np.zeros((n_out, m_out))
    for n, proj in enumerate(first.projectors):
        dephased = proj @ rho @ proj
        evolved = sum(op @ dephased @ op.conj().T for op in kraus)
        channel_of_proj = sum(op @ proj @ op.conj().T for op in kraus)
        weight = _trace_product(proj, rho)
        for m, q in enumerate(second.projectors):
            # tr{Q τ Q} = tr{Q τ} since Q is idempotent.
            p[n, m] = _trace_product(q, evolved)
            p_factorized[n, m] = _trace_product(q, channel_of_proj) * weight
    residual = float(np.max(np.abs(p - p_factorized)))

    evolved_rho = sum(op @ rho @ op.conj().T for op in kraus)
    p_direct = np.array([_trace_product(q, evolved_rho)
                         for q in second.projectors])
    return distribution_from_joint(p, support_epsilon,
                                   factorization_residual=residual,
                                   p_second_direct=p_direct)


@dataclass(frozen=True)
class MutualInformationTable:
    """Single-trial mutual information and its exponential average.

    ``i_table[n, m]`` is ln p(m|n) − ln p(m) on the support mask and NaN
    elsewhere. ``exp_average`` is Σ p(n,m)·p(m)/p(m|n) over the support,
    computed in ratio form (never by exponentiating a log).
    ``support_defect`` is the probability-product mass 1 − Σ p(n)p(m)
    excluded by the support restriction, so exp_average + support_defect
    is identically 1; a full-support experiment has defect 0 and the
    exponential average is exactly the conservation-of-probability sum.
    ``average_mi`` is the classical mutual information of the outcome
    pair, non-negative by convexity.
    """

    i_table: np.ndarray
    exp_average: float
    support_defect: float
    average_mi: float

    @property
    def support_mask(self) -> np.ndarray:
        return np.isfinite(self.i_table)


def mutual_information_table(jd: JointDistribution) -> MutualInformationTable:
    """Mutual-information table of a joint distribution.

    The bookkeeping identity exp_average + support_defect = 1 and the
    Jensen bound average_mi ≥ 0 are re-validated on the computed numbers
    (both hold by construction for any distribution that passed
    :func:`distribution_from_joint`).
    """
    mask = jd.support_mask
    rows, cols = np.nonzero(mask)
    i_table = np.full(jd.shape, np.nan)
    exp_average = 0.0
    support_defect = 1.0
    average_mi = 0.0
    if rows.size:
        cond = jd.p_cond[rows, cols]
        marginal = jd.p_second[cols]
        joint = jd.p_joint[rows, cols]
        i_vals = np.log(cond) - np.log(marginal)
        i_table[rows, cols] = i_vals
        exp_average = float(np.sum(joint * marginal / cond))
        support_defect = 1.0 - float(np.sum(jd.p_first[rows] * marginal))
        average_mi = float(np.sum(joint * i_vals))

    bookkeeping = abs(exp_average + support_defect - 1.0)
    if bookkeeping > BOOKKEEPING_TOL:
        raise ValidationError(
            f"bookkeeping identity violated: exp_average + support_defect "
            f"deviates from 1 by {bookkeeping:.3e}",
            invariant="bookkeeping", residual=bookkeeping)
    if average_mi < -JENSEN_TOL:
        raise ValidationError(
            f"average mutual information is negative: {average_mi!r}",
            invariant="jensen", residual=-average_mi)
    return MutualInformationTable(
        i_table=_freeze(i_table), exp_average=exp_average,
        support_defect=support_defect, average_mi=average_mi)


def exp_average_with_reference(jd: JointDistribution, q) -> float:
    """Exponential average against an arbitrary reference distribution q(m).

    Returns Σ p(n,m)·q(m)/p(m|n) over the support mask. The
    conservation-of-probability argument goes through verbatim for any
    normalized q in place of the true marginal p(m): on full support the
    sum telescopes to Σ_n p(n) · Σ_m q(m) = 1. Passing q = p_second
    reproduces ``exp_average`` of :func:`mutual_information_table`.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (jd.shape[1],):
        raise ValueError(
            f"reference must have shape ({jd.shape[1]},), got {q.shape}")
    if not np.all(np.isfinite(q)) or float(q.min()) < -PROBABILITY_BOUND_TOL:
        raise ValueError(
            f"reference is not a probability vector: min entry {q.min()!r}")
    total = float(q.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(
            f"reference is not normalized: sums to {total!r}")
    q = np.clip(q, 0.0, None)
    rows, cols = np.nonzero(jd.support_mask)
    if not rows.size:
        return 0.0
    return float(np.sum(jd.p_joint[rows, cols] * q[cols] / jd.p_cond[rows, cols]))


@dataclass(frozen=True)
class WorkStatistics:
    """Work table W_nm = E'_m − E_n and the exponential work average.

    ``jarzynski_lhs`` is the exact sum Σ p(n,m) e^{−βW_nm};
    ``jarzynski_rhs`` is Z'/Z = e^{−βΔF}. Their difference
    (``jarzynski_defect``) vanishes exactly when the conditional matrix is
    doubly stochastic and the initial state is Gibbs in the first
    measurement basis — ``conditional_colsums`` is the direct diagnostic:
    the identity requires every column sum Σ_n p(m|n) to equal 1, which a
    unital channel with rank-1 projectors delivers.
    """

    work_table: np.ndarray
    beta: float
    delta_F: float
    jarzynski_lhs: float
    jarzynski_rhs: float
    jarzynski_defect: float
    conditional_colsums: np.ndarray
    dissipation_table: np.ndarray


def work_statistics(jd: JointDistribution, first_energies, second_energies,
                    beta: float, Z: float, Z_prime: float) -> WorkStatistics:
    """Jarzynski-side statistics of a joint distribution.

    Parameters
    ----------
    jd : JointDistribution
        Outcome table; cells with p(n,m) = 0 contribute nothing to the
        work average, so extreme work values on zero-probability cells
        cannot poison the sum.
    first_energies, second_energies : sequences of float
        Outcome energy labels E_n and E'_m; lengths must match the table.
    beta : float
        Inverse temperature (> 0), shared by both ensembles.
    Z, Z_prime : float
        Initial and final partition functions (> 0); the right-hand side
        is Z'/Z and ΔF = −(1/β) ln(Z'/Z).
    """
    e_first = np.asarray(first_energies, dtype=float)
    e_second = np.asarray(second_energies, dtype=float)
    n_out, m_out = jd.shape
    if e_first.shape != (n_out,) or e_second.shape != (m_out,):
        raise ValueError(
            f"energy lists of lengths {e_first.shape[0]}/{e_second.shape[0]} "
            f"do not match the {n_out}x{m_out} outcome table")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if Z <= 0 or Z_prime <= 0:
        raise ValueError(f"partition functions must be positive, got {Z}, {Z_prime}")

    work = e_second[None, :] - e_first[:, None]
    delta_f = -(np.log(Z_prime) - np.log(Z)) / beta

    positive = jd.p_joint > 0
    terms = np.zeros(jd.shape)
    terms[positive] = jd.p_joint[positive] * np.exp(-beta * work[positive])
    lhs = float(terms.sum())
    if not np.isfinite(lhs):
        raise ValidationError(
            "exponential work average overflowed", invariant="finite_lhs")
    rhs = Z_prime / Z

    defined = jd.p_first > jd.support_epsilon
    colsums = jd.p_cond[defined].sum(axis=0)
    dissipation = beta * (work - delta_f)
    return WorkStatistics(
        work_table=_freeze(work), beta=float(beta), delta_F=float(delta_f),
        jarzynski_lhs=lhs, jarzynski_rhs=float(rhs),
        jarzynski_defect=lhs - float(rhs),
        conditional_colsums=_freeze(colsums),
        dissipation_table=_freeze(dissipation))


def compare_mi_to_dissipation(mi: MutualInformationTable,
                              ws: WorkStatistics) -> float:
    """Largest gap between I_nm and β(W_nm − ΔF) over the support.

    The two tables coincide exactly only in special scenarios (e.g. the
    channel carries the initial Gibbs state to the final one and the
    conditionals match the final Gibbs weights); this measures how far a
    given experiment is from that identification.
    """
    if mi.i_table.shape != ws.dissipation_table.shape:
        raise ValueError(
            f"table shapes disagree: {mi.i_table.shape} vs "
            f"{ws.dissipation_table.shape}")
    mask = mi.support_mask
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(mi.i_table[mask] - ws.dissipation_table[mask])))
