"""Gauss-Newton reconstruction of Chebyshev cracks from far-field data.

The unknowns of crack ``j`` are the horizontal axis ``x = d0 + d1 s`` and the
Chebyshev coefficients of the vertical profile.  Each Newton step solves the
real-stacked, Tikhonov-regularized linearization built from the analytic
Jacobian in :mod:`crackscat.frechet`.  The order ``p`` of the profile grows
from ``p0`` to ``m_p``; new coefficients start at zero so the previous
iterate stays exactly representable.

``run_multi_freq`` runs the lowest frequency with the axis free, then
continues at each higher frequency with the axis frozen.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .forward import FarFieldSet, ForwardSystem
from .frechet import fd_jacobian, jacobian
from .geometry import ChebCrack, CrackSet, GeometryError, validity_check
from .numerics import tikhonov_lstsq

log = logging.getLogger(__name__)


class StepRejected(RuntimeError):
    """Every damped version of a Newton update violated the validity check."""

    def __init__(self, message, violations=(), history=None):
        super().__init__(message)
        self.violations = list(violations)
        self.history = history


@dataclass
class NewtonConfig:
    p0: int = 1
    m_p: int | dict = 4  # int, or {k: max order} per frequency stage
    eps_stop: float = 1e-3
    eps_target: float | dict | Callable | None = 1e-3  # None: always run to m_p
    tikhonov_lambda: float = 1e-8
    max_inner: int = 30
    step_clamp: float = 0.5
    damping_retries: int = 5
    horizontal_guard: float = 1e-8
    n: int = 64
    fd_jacobian: bool = False
    fd_eps: float = 1e-6
    monotone: bool = True  # also halve steps that raise the residual

    def __post_init__(self):
        if self.p0 < 0:
            raise ValueError("p0 must be non-negative")
        if self.eps_stop <= 0 or self.step_clamp <= 0 or self.tikhonov_lambda < 0:
            raise ValueError("thresholds must be positive")
        if self.max_inner < 1:
            raise ValueError("max_inner must be at least 1")

    def max_order(self, k: float) -> int:
        if isinstance(self.m_p, dict):
            return int(_lookup(self.m_p, k))
        return int(self.m_p)

    def target(self, k: float) -> float | None:
        if self.eps_target is None:
            return None
        if callable(self.eps_target):
            return float(self.eps_target(k))
        if isinstance(self.eps_target, dict):
            return float(_lookup(self.eps_target, k))
        return float(self.eps_target)


def _lookup(table: dict, k: float):
    for key, val in table.items():
        if abs(float(key) - k) <= 1e-9 * max(1.0, abs(k)):
            return val
    raise KeyError(f"no entry for k = {k}")


@dataclass
class IterationRecord:
    stage_k: float
    p: int
    iter: int
    J_r: float
    step_norm: float
    damped: bool


@dataclass
class ReconstructionState:
    cracks: list
    p: int
    J_r: float = float("nan")
    history: list = field(default_factory=list)
    stage: int = 0
    horizontal_frozen: bool = False
    target_missed: bool = False
    d_min: float = 0.05

    def crack_set(self) -> CrackSet:
        return CrackSet(self.cracks, self.d_min)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([c.params for c in self.cracks])


def _bundle(data) -> list[FarFieldSet]:
    if isinstance(data, FarFieldSet):
        return [data]
    data = list(data)
    if not data:
        raise ValueError("empty data bundle")
    k = data[0].k
    if any(abs(d.k - k) > 1e-12 for d in data):
        raise ValueError("a data bundle must share one wavenumber")
    return data


def _predict(cracks: CrackSet, data: list[FarFieldSet], n: int):
    system = ForwardSystem(cracks, n, data[0].k)
    sols = [system.solve(dset.d) for dset in data]
    pred = [system.farfield_matrix(dset.directions) @ sol.psi for sol, dset in zip(sols, data)]
    return system, sols, pred


def _relative(pred, data) -> float:
    num = sum(np.linalg.norm(p - d.values) ** 2 for p, d in zip(pred, data))
    den = sum(np.linalg.norm(d.values) ** 2 for d in data)
    return float(np.sqrt(num / den))


def residual(state: ReconstructionState | Sequence[ChebCrack], data, n: int = 64) -> float:
    """``||F(Sigma) - u_inf|| / ||u_inf||`` over every direction in the bundle."""
    cracks = state.crack_set() if isinstance(state, ReconstructionState) else CrackSet(state)
    bundle = _bundle(data)
    _, _, pred = _predict(cracks, bundle, n)
    return _relative(pred, bundle)


def vertical_deviation(recon: ChebCrack, truth, s=None) -> np.ndarray:
    """``|y_recon(x) - y_truth(x)|`` at the abscissae of ``truth`` sampled at ``s``.

    ``s`` defaults to 161 points on ``[-0.8, 0.8]``; reconstructed
    parameters falling outside ``[-1, 1]`` are clamped to the tips.
    """
    s = np.linspace(-0.8, 0.8, 161) if s is None else np.asarray(s, dtype=float)
    pts = truth.point(s)
    srec = np.clip((pts[:, 0] - recon.d0) / recon.d1, -1.0, 1.0)
    return np.abs(recon.point(srec)[:, 1] - pts[:, 1])


def _apply_update(cracks, labels, delta, scale):
    new = []
    for j, c in enumerate(cracks):
        d0, d1, coef = c.d0, c.d1, np.array(c.c)
        for lab, v in zip(labels, delta):
            if lab[0] != j:
                continue
            if lab[1] == "vertical":
                coef[lab[2]] += scale * v
            elif lab[2] == 0:
                d0 += scale * v
            else:
                d1 += scale * v
        new.append(ChebCrack(d0, d1, tuple(coef)))
    return new


def _linear_system(cracks, data, sols, config, p, horizontal):
    ncr = len(cracks)
    blocks = []
    for sol, dset in zip(sols, data):
        if config.fd_jacobian:
            jb = fd_jacobian(CrackSet(cracks), config.n, dset.k, dset.d, p, horizontal, config.fd_eps,
                             dset.directions)
        else:
            jb = jacobian(sol, p, horizontal, dset.directions)
        blocks.append(jb)
    labels = blocks[0].labels
    mat = np.vstack([b.matrix for b in blocks])
    if horizontal:
        hcols = blocks[0].columns("horizontal")
        norms = np.linalg.norm(mat[:, hcols], axis=0)
        if np.any(norms < config.horizontal_guard * np.linalg.norm(mat)):
            log.info("horizontal columns below guard; solving for vertical coefficients only")
            keep = ~hcols
            mat = mat[:, keep]
            labels = [lab for lab, kk in zip(labels, keep) if kk]
    return mat, labels, ncr


@dataclass
class StepResult:
    state: ReconstructionState
    step_norm: float
    damped: bool
    sols: list
    pred: list


def newton_step(state: ReconstructionState, data, config: NewtonConfig,
                reference: Sequence[ChebCrack] | None = None, _cache=None) -> StepResult:
    """One regularized Gauss-Newton update.

    The update is halved while the trial cracks fail :func:`validity_check`
    (against ``reference``, default the current cracks) and, with
    ``config.monotone``, while the residual does not decrease.
    """
    bundle = _bundle(data)
    cracks = [c.padded(max(state.p, c.order)) for c in state.cracks]
    if _cache is None:
        _, sols, pred = _predict(CrackSet(cracks, state.d_min), bundle, config.n)
        jr = _relative(pred, bundle)
    else:
        sols, pred = _cache
        jr = state.J_r
    mat, labels, _ = _linear_system(cracks, bundle, sols, config, state.p, not state.horizontal_frozen)
    rhs = np.concatenate([d.values - p for d, p in zip(bundle, pred)])
    a = np.vstack([mat.real, mat.imag])
    b = np.concatenate([rhs.real, rhs.imag])
    lam = config.tikhonov_lambda * np.trace(a.T @ a) / a.shape[1]
    delta = tikhonov_lstsq(a, b, lam)
    biggest = np.abs(delta).max() if delta.size else 0.0
    if biggest > config.step_clamp:
        delta = delta * (config.step_clamp / biggest)
    ref = reference if reference is not None else state.cracks
    scale = 1.0
    last = None
    fallback = None
    for attempt in range(config.damping_retries + 1):
        trial = _apply_update(cracks, labels, delta, scale)
        trial_set = CrackSet(trial, state.d_min)
        report = validity_check(trial_set, reference=ref)
        if report.ok:
            try:
                _, tsols, tpred = _predict(trial_set, bundle, config.n)
            except (GeometryError, np.linalg.LinAlgError) as exc:
                last = [("forward", str(exc))]
            else:
                tjr = _relative(tpred, bundle)
                result = StepResult(replace(state, cracks=trial, J_r=tjr),
                                    float(scale * np.linalg.norm(delta)), attempt > 0, tsols, tpred)
                if not config.monotone or tjr < jr:
                    return result
                if fallback is None or tjr < fallback.state.J_r:
                    fallback = result
        else:
            last = report.violations
        scale *= 0.5
    if fallback is not None:
        # no damped step lowers the residual: keep the current iterate
        return StepResult(state, 0.0, True, sols, pred)
    raise StepRejected(f"all {config.damping_retries} damped steps invalid", last)


def run_single_freq(initial, data, config: NewtonConfig, p0: int | None = None, *,
                    horizontal_frozen: bool = False, stage: int = 0, history=None,
                    d_min: float = 0.05) -> ReconstructionState:
    """Newton iterations with order escalation ``p = p0 .. m_p`` at one wavenumber."""
    bundle = _bundle(data)
    k = bundle[0].k
    if isinstance(initial, ReconstructionState):
        cracks = list(initial.cracks)
        d_min = initial.d_min
    elif isinstance(initial, CrackSet):
        cracks = list(initial)
        d_min = initial.d_min
    else:
        cracks = list(initial)
    p0 = config.p0 if p0 is None else p0
    m_p = config.max_order(k)
    if p0 > m_p:
        raise ValueError(f"p0 = {p0} exceeds the maximal order {m_p}")
    report = validity_check(CrackSet(cracks, d_min))
    if not report.ok:
        raise GeometryError(f"invalid initial guess: {report.violations}")
    reference = list(cracks)
    history = [] if history is None else history
    target = config.target(k)
    state = ReconstructionState(cracks, p0, history=history, stage=stage,
                                horizontal_frozen=horizontal_frozen, d_min=d_min)
    _, sols, pred = _predict(state.crack_set(), bundle, config.n)
    state.J_r = _relative(pred, bundle)
    history.append(IterationRecord(k, p0, 0, state.J_r, 0.0, False))
    for p in range(p0, m_p + 1):
        state.p = p
        state.cracks = [c.padded(max(p, c.order)) for c in state.cracks]
        for it in range(1, config.max_inner + 1):
            try:
                step = newton_step(state, bundle, config, reference, _cache=(sols, pred))
            except StepRejected as exc:
                exc.history = history
                raise
            change = abs(step.state.J_r - state.J_r)
            if step.state.J_r > state.J_r:
                log.debug("residual increased at k=%g p=%d iter=%d: %.3e -> %.3e",
                          k, p, it, state.J_r, step.state.J_r)
            state, sols, pred = step.state, step.sols, step.pred
            history.append(IterationRecord(k, p, it, state.J_r, step.step_norm, step.damped))
            if change <= config.eps_stop:
                break
        if target is not None and state.J_r < target:
            break
    state.target_missed = target is not None and not state.J_r < target
    return state


def run_multi_freq(initial, data_list, config: NewtonConfig, d_min: float = 0.05) -> ReconstructionState:
    """Frequency continuation: axis fitted at the lowest k, frozen afterwards.

    ``data_list`` holds one FarFieldSet (or a same-k bundle of them) per stage,
    ordered by strictly increasing wavenumber.
    """
    stages = [_bundle(d) for d in data_list]
    ks = [b[0].k for b in stages]
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("frequencies must be strictly increasing")
    history: list = []
    missed = False
    state = run_single_freq(initial, stages[0], config, history=history, d_min=d_min)
    missed |= state.target_missed
    for idx, bundle in enumerate(stages[1:], start=1):
        p0 = min(state.p, config.max_order(bundle[0].k))
        state = run_single_freq(state, bundle, config, p0, horizontal_frozen=True, stage=idx, history=history)
        missed |= state.target_missed
    state.target_missed = missed
    return state
