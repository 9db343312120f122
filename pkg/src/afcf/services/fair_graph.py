"""
afcf/services/fair_graph.py — Справедливый якорный граф (ADMM + Frank-Wolfe).

Задача:
    min_Z ‖X − HZ‖²_F + α‖Z‖²_F
    s.t.  Σ_{j∈C_l} Σ_{i∈G_r} Z_{j,i} = t_{l,r}  для всех (l, r),
          Z_{:,i} ∈ Δ^m                      для всех i.

Расщепление Z = E: симплекс остаётся на Z (away-step Frank-Wolfe по
столбцам с шагом Ньютона на грани),
ограничения блоков — на E (замкнутая проекция). Двойственная переменная
хранится масштабированной: U = Λ/ρ.

Итерация:
    Z ← argmin_{Z∈Δ} ½ zᵀQz + c_iᵀz,  Q = 2(HᵀH + (α+ρ/2)I),
                                      c_i = −2Hᵀx_i − ρe_i + λ_i
    E ← проекция R = Z + U на аффинное множество блоков
    U ← U + Z − E
    r = ‖Z − E‖_F,  s = ρ‖E − E_prev‖_F;  каждые 10 итераций — адаптивный ρ.

    При фиксированном ρ невязка c = ρr² + s²/ρ не возрастает (точные
    подзадачи); ни ‖X − HZ‖² + α‖Z‖², ни лагранжиан из недопустимой
    стартовой точки монотонными быть не обязаны.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from afcf.exceptions import InfeasibleConstraintError, SolverDivergenceError
from afcf.models.anchors import AnchorLabeling, AnchorSet
from afcf.models.dataset import Dataset
from afcf.models.graph import (
    AdmmState,
    AnchorGraph,
    ConstraintTable,
    SolveResult,
    SolverConfig,
    TraceEntry,
)
from afcf.services.dataset_service import group_stats
from afcf.services.metrics import balance_from_counts

logger = logging.getLogger(__name__)

SIMPLEX_ATOL = 1e-6
NEGATIVE_ATOL = 1e-9


# ═══════════════════════════════════════════════════════════════════════════
# ОГРАНИЧЕНИЯ
# ═══════════════════════════════════════════════════════════════════════════


def build_constraint_table(
    labeling: AnchorLabeling,
    dataset: Dataset,
    m: int,
) -> ConstraintTable:
    """
    Целевые массы t_{l,r} = (|G_{l,r}| / m_r) · |G_r|.

    При точных пропорциях квот (m_r/m = |G_r|/n) совпадает с |G_{l,r}|·n/m
    и всегда даёт Σ_l t_{l,r} = |G_r|, т.е. совместимость со
    столбцово-стохастическим Z.

    Raises:
        InfeasibleConstraintError: у группы с объектами нет ни одного якоря.
    """
    if labeling.m != m:
        raise InfeasibleConstraintError(
            f"Labeling covers {labeling.m} anchors, expected m={m}"
        )
    t = dataset.t
    joint = np.zeros((labeling.k, t), dtype=np.int64)
    cols = min(t, labeling.joint_counts.shape[1])
    joint[:, :cols] = labeling.joint_counts[:, :cols]

    sizes = group_stats(dataset).sizes
    anchors_per_group = joint.sum(axis=0)
    missing = np.flatnonzero((anchors_per_group == 0) & (sizes > 0))
    if missing.size:
        r = int(missing[0])
        raise InfeasibleConstraintError(
            f"Group {r} has {int(sizes[r])} samples but no anchors; "
            "fairness constraints are infeasible (increase m or use fdas anchors)",
            details={"group": r},
        )

    targets = joint / anchors_per_group[None, :] * sizes[None, :]
    cluster_sizes = joint.sum(axis=1)
    table = ConstraintTable(
        targets=targets,
        anchor_blocks=labeling.anchor_blocks(),
        sample_blocks=[np.flatnonzero(dataset.groups == r) for r in range(t)],
        block_sizes=np.outer(cluster_sizes, sizes),
    )
    if abs(table.targets.sum() - dataset.n) > 1e-9 * max(1, dataset.n):
        raise InfeasibleConstraintError(
            f"Targets sum to {table.targets.sum()}, expected n={dataset.n}"
        )
    return table


def target_balance(table: ConstraintTable) -> float:
    """balance мягких долей, заданных целевыми массами."""
    return balance_from_counts(table.targets)


def _block_index(table: ConstraintTable, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Кластер каждого якоря и группа каждого объекта."""
    cluster_of = np.empty(m, dtype=np.int64)
    for l, block in enumerate(table.anchor_blocks):
        cluster_of[block] = l
    group_of = np.empty(n, dtype=np.int64)
    for r, block in enumerate(table.sample_blocks):
        group_of[block] = r
    return cluster_of, group_of


# ═══════════════════════════════════════════════════════════════════════════
# ЦЕЛЕВАЯ ФУНКЦИЯ
# ═══════════════════════════════════════════════════════════════════════════


def objective(X: np.ndarray, H: np.ndarray, Z: np.ndarray, alpha: float) -> float:
    """‖X − HZ‖²_F + α‖Z‖²_F."""
    residual = X - H @ Z
    return float(np.vdot(residual, residual) + alpha * np.vdot(Z, Z))


def lagrangian(X, H, state: AdmmState, alpha: float) -> float:
    """Расширенный лагранжиан в текущей точке (Z, E, Λ, ρ)."""
    diff = state.Z - state.E
    return (
        objective(X, H, state.Z, alpha)
        + float(np.vdot(state.lam, diff))
        + 0.5 * state.rho * float(np.vdot(diff, diff))
    )


def is_monotone(values: list[float], rel_tol: float = 1e-6) -> bool:
    """Невозрастание с допуском rel_tol·|первое значение| на шаг."""
    if len(values) < 2:
        return True
    slack = rel_tol * abs(values[0])
    return bool(np.all(np.diff(values) <= slack))


def combined_residual(r: float, s: float, rho: float) -> float:
    """ρr² + s²/ρ: сумма квадратов шагов по (E, Λ) в метрике ADMM."""
    return rho * r * r + s * s / rho


def residual_monotone(
    trace: list[TraceEntry],
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-12,
) -> bool:
    """
    Невозрастание ``combined_residual`` внутри каждого окна постоянного ρ.

    Сравниваются только соседние итерации с одинаковым ρ; смена ρ
    начинает новое окно.
    """
    for prev, cur in zip(trace, trace[1:]):
        if cur.rho != prev.rho:
            continue
        slack = rel_tol * prev.combined_residual + abs_tol
        if cur.combined_residual > prev.combined_residual + slack:
            return False
    return True


# ═══════════════════════════════════════════════════════════════════════════
# FRANK-WOLFE
# ═══════════════════════════════════════════════════════════════════════════


def _support_groups(support: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Группирует столбцы по носителю: [(индексы носителя S, столбцы), ...]."""
    m, n = support.shape
    if m <= 62:
        keys = (support.T.astype(np.int64) << np.arange(m, dtype=np.int64)).sum(axis=1)
        uniq, inverse = np.unique(keys, return_inverse=True)
        patterns = ((uniq[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(bool)
    else:
        patterns, inverse = np.unique(support.T, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    splits = np.cumsum(np.bincount(inverse, minlength=len(patterns)))[:-1]
    return [
        (np.flatnonzero(pattern), cols)
        for pattern, cols in zip(patterns, np.split(order, splits))
    ]


def _qp_values(Z: np.ndarray, QZ: np.ndarray, C: np.ndarray) -> np.ndarray:
    """½ zᵀQz + cᵀz по столбцам."""
    return np.einsum("ij,ij->j", Z, 0.5 * QZ + C)


def _face_step(
    Q: np.ndarray,
    C: np.ndarray,
    Z: np.ndarray,
    QZ: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Шаг Ньютона на текущей грани {z_S ≥ 0, Σz_S = 1}.

    Для каждого носителя S решается KKT-система
        [Q_SS 1; 1ᵀ 0] [y; ν] = [−c_S; 1].
    Если y ≥ 0, столбец переходит в минимум грани; иначе шаг
    z + γ(y − z) до первой обнулившейся координаты. Шаг принимается
    только при невозрастании целевой функции.
    """
    target = Z.copy()
    for S, cols in _support_groups(Z > 0):
        p = S.size
        if p < 2:
            continue
        kkt = np.zeros((p + 1, p + 1))
        kkt[:p, :p] = Q[np.ix_(S, S)]
        kkt[:p, p] = 1.0
        kkt[p, :p] = 1.0
        rhs = np.vstack([-C[np.ix_(S, cols)], np.ones((1, cols.size))])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        target[np.ix_(S, cols)] = sol[:p]

    blocked = target < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(blocked, Z / (Z - target), np.inf)
    gamma = np.minimum(1.0, ratios.min(axis=0))
    Y = Z + gamma * (target - Z)
    Y[blocked & (ratios <= gamma)] = 0.0
    np.clip(Y, 0.0, None, out=Y)
    Y /= Y.sum(axis=0)

    QY = Q @ Y
    better = _qp_values(Y, QY, C) <= _qp_values(Z, QZ, C)
    Z = np.where(better, Y, Z)
    QZ = np.where(better, QY, QZ)
    return Z, QZ


def frank_wolfe_batch(
    Q: np.ndarray,
    C: np.ndarray,
    Z0: np.ndarray,
    max_iter: int = 200,
    eps_fw: float = 1e-8,
    eps_curv: float = 1e-12,
) -> np.ndarray:
    """
    Frank-Wolfe с away-шагами по каждому столбцу: min_{z∈Δ} ½ zᵀQz + cᵀz.

    На итерации для столбца с градиентом g:
        FW-вершина j = argmin g,  зазор δ_fw = gᵀz − g_j;
        away-вершина a = argmax_{z_a>0} g,  зазор δ_a = g_a − gᵀz.
    При δ_fw ≥ δ_a шаг к e_j (γ ≤ 1), иначе от e_a (γ ≤ z_a/(1 − z_a);
    на границе координата a выбывает). Точный линейный поиск, затем
    шаг Ньютона на грани носителя (``_face_step``), поэтому задача на
    многограннике решается за конечное число смен носителя.

    Столбец выбывает, как только δ_fw ≤ ε_fw.
    """
    Z = np.array(Z0, dtype=np.float64, copy=True)
    C = np.asarray(C, dtype=np.float64)
    QZ = Q @ Z
    active = np.arange(Z.shape[1])
    for _ in range(max_iter):
        if active.size == 0:
            break
        cols = np.arange(active.size)
        Za = Z[:, active]
        G = QZ[:, active] + C[:, active]
        gz = np.einsum("ij,ij->j", G, Za)
        j = np.argmin(G, axis=0)
        fw_gap = gz - G[j, cols]
        go = fw_gap > eps_fw
        if not go.any():
            break
        active, Za, G, gz, j, fw_gap = active[go], Za[:, go], G[:, go], gz[go], j[go], fw_gap[go]
        cols = np.arange(active.size)

        a = np.argmax(np.where(Za > 0, G, -np.inf), axis=0)
        away_gap = G[a, cols] - gz
        toward = fw_gap >= away_gap
        za = Za[a, cols]

        QZa = QZ[:, active]
        # toward: d = e_j − z;  away: d = z − e_a
        Qd = np.where(toward, Q[:, j] - QZa, QZa - Q[:, a])
        slope = np.where(toward, -fw_gap, -away_gap)
        dQd = np.where(
            toward,
            Qd[j, cols] - np.einsum("ij,ij->j", Za, Qd),
            np.einsum("ij,ij->j", Za, Qd) - Qd[a, cols],
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma_max = np.where(toward, 1.0, za / (1.0 - za))
            gamma = np.where(dQd <= eps_curv, gamma_max, np.clip(-slope / dQd, 0.0, gamma_max))

        Znew = np.where(toward, Za * (1.0 - gamma), Za * (1.0 + gamma))
        Znew[j[toward], cols[toward]] += gamma[toward]
        away = ~toward
        Znew[a[away], cols[away]] -= gamma[away]
        drop = away & (gamma >= gamma_max)
        Znew[a[drop], cols[drop]] = 0.0
        np.clip(Znew, 0.0, None, out=Znew)
        QZnew = QZa + gamma * Qd

        Z[:, active], QZ[:, active] = _face_step(Q, C[:, active], Znew, QZnew)
    return Z


def frank_wolfe(
    Q: np.ndarray,
    c: np.ndarray,
    z0: np.ndarray,
    max_iter: int = 200,
    eps_fw: float = 1e-8,
    eps_curv: float = 1e-12,
) -> np.ndarray:
    """Одна задача min_{z∈Δ^m} ½ zᵀQz + cᵀz."""
    c = np.asarray(c, dtype=np.float64).reshape(-1, 1)
    z0 = np.asarray(z0, dtype=np.float64).reshape(-1, 1)
    return frank_wolfe_batch(Q, c, z0, max_iter, eps_fw, eps_curv)[:, 0]


# ═══════════════════════════════════════════════════════════════════════════
# ШАГИ ADMM
# ═══════════════════════════════════════════════════════════════════════════


def z_hessian(gram: np.ndarray, alpha: float, rho: float) -> np.ndarray:
    """Q = 2(HᵀH + (α + ρ/2)I)."""
    return 2.0 * (gram + (alpha + rho / 2.0) * np.eye(gram.shape[0]))


def update_z(
    state: AdmmState,
    X: np.ndarray,
    H: np.ndarray,
    config: SolverConfig,
    *,
    gram: np.ndarray | None = None,
    HtX: np.ndarray | None = None,
) -> np.ndarray:
    """
    Z-подзадача: n независимых QP на симплексе, тёплый старт от текущего Z.

    При ``config.max_workers > 1`` столбцы делятся на блоки и решаются
    в потоках; результат не зависит от числа потоков.
    """
    gram = H.T @ H if gram is None else gram
    HtX = H.T @ X if HtX is None else HtX
    Q = z_hessian(gram, config.alpha, state.rho)
    C = -2.0 * HtX - state.rho * state.E + state.lam

    n = C.shape[1]
    workers = min(config.max_workers, n)
    solve_kwargs = dict(max_iter=config.fw_max_iter, eps_fw=config.eps_fw, eps_curv=config.eps_curv)
    if workers <= 1:
        return frank_wolfe_batch(Q, C, state.Z, **solve_kwargs)

    chunks = np.array_split(np.arange(n), workers)
    parts = Parallel(n_jobs=workers, prefer="threads")(
        delayed(frank_wolfe_batch)(Q, C[:, idx], state.Z[:, idx], **solve_kwargs)
        for idx in chunks
    )
    return np.hstack(parts)


def update_e(
    state: AdmmState,
    table: ConstraintTable | None,
    rho: float | None = None,
) -> np.ndarray:
    """
    E-подзадача: евклидова проекция R = Z + Λ/ρ на множество блочных сумм.

    E_{j,i} = R_{j,i} + (t_{l,r} − Σ_блока R) / (|C_l|·|G_r|).
    Без таблицы (режим unconstrained) E = R.

    Raises:
        InfeasibleConstraintError: пустой блок с положительной целью.
    """
    rho = state.rho if rho is None else rho
    R = state.Z + state.lam / rho
    if table is None:
        return R

    m, n = R.shape
    sizes = table.block_sizes.astype(np.float64)
    bad = (sizes == 0) & (table.targets > 0)
    if bad.any():
        l, r = (int(x) for x in np.argwhere(bad)[0])
        raise InfeasibleConstraintError(
            f"Block (cluster {l}, group {r}) is empty but has target {table.targets[l, r]}",
            details={"cluster": l, "group": r},
        )
    cluster_of, group_of = _block_index(table, m, n)

    group_onehot = np.zeros((n, table.t))
    group_onehot[np.arange(n), group_of] = 1.0
    per_group = R @ group_onehot  # m×t
    block_sums = np.zeros((table.k, table.t))
    np.add.at(block_sums, cluster_of, per_group)

    correction = np.divide(
        table.targets - block_sums,
        sizes,
        out=np.zeros_like(block_sums),
        where=sizes > 0,
    )
    return R + correction[cluster_of][:, group_of]


def update_rho(
    state: AdmmState,
    beta: float = 2.0,
    tau: float = 10.0,
    period: int = 10,
) -> float:
    """
    Адаптивный штраф (раз в ``period`` итераций):
        ρ ← βρ, если r > τs;  ρ ← ρ/β, если s > τr;  иначе без изменений.

    При смене ρ масштабированная двойственная U умножается на ρ_old/ρ_new.
    """
    if state.iteration % period != 0:
        return state.rho
    old = state.rho
    if state.r > tau * state.s:
        new = beta * old
    elif state.s > tau * state.r:
        new = old / beta
    else:
        return old
    state.dual = state.dual * (old / new)
    state.rho = new
    logger.debug("ADMM iter %d: rho %.4g -> %.4g (r=%.3e, s=%.3e)", state.iteration, old, new, state.r, state.s)
    return new


# ═══════════════════════════════════════════════════════════════════════════
# РЕШАТЕЛЬ
# ═══════════════════════════════════════════════════════════════════════════


def _check_finite(arr: np.ndarray, iteration: int, name: str) -> None:
    if not np.isfinite(arr).all():
        raise SolverDivergenceError(iteration, name)


def _export_graph(Z: np.ndarray) -> AnchorGraph:
    """Обнуляет малые отрицательные элементы и проверяет суммы столбцов."""
    if (Z < -NEGATIVE_ATOL).any():
        raise SolverDivergenceError(-1, "Z (negative entries)")
    Z = np.clip(Z, 0.0, None)
    col_err = np.abs(Z.sum(axis=0) - 1.0)
    if (col_err > SIMPLEX_ATOL).any():
        i = int(np.argmax(col_err))
        raise SolverDivergenceError(-1, f"Z (column {i} sums to {Z[:, i].sum():.9f})")
    return AnchorGraph(Z=Z)


def solve(
    dataset: Dataset,
    anchor_set: AnchorSet,
    anchor_labeling: AnchorLabeling | None,
    config: SolverConfig,
    *,
    constraints: ConstraintTable | None = None,
    fair: bool = True,
    on_iteration: Callable[[TraceEntry], None] | None = None,
) -> SolveResult:
    """
    ADMM для справедливого якорного графа.

    Args:
        anchor_labeling: Разметка якорей (нужна при fair=True, если не
            передана готовая ``constraints``).
        fair: False — тот же функционал без ограничений блоков (AC).
        on_iteration: Обратный вызов на каждую строку трассы.

    Raises:
        SolverDivergenceError: нечисловой итерат (номер итерации в details).
        InfeasibleConstraintError: ограничения несовместны.
    """
    X = dataset.features
    H = anchor_set.H
    m, n = anchor_set.m, dataset.n
    table = None
    if fair:
        table = constraints if constraints is not None else build_constraint_table(anchor_labeling, dataset, m)

    Z0 = np.full((m, n), 1.0 / m)
    state = AdmmState(Z=Z0, E=Z0.copy(), dual=np.zeros((m, n)), rho=config.rho0)
    gram = H.T @ H
    HtX = H.T @ X
    trace: list[TraceEntry] = []
    converged = False

    for it in range(config.max_iter):
        state.iteration = it
        state.Z = update_z(state, X, H, config, gram=gram, HtX=HtX)
        _check_finite(state.Z, it, "Z")

        E_prev = state.E
        state.E = update_e(state, table)
        _check_finite(state.E, it, "E")
        state.dual = state.dual + state.Z - state.E
        _check_finite(state.dual, it, "dual")

        state.r = float(np.linalg.norm(state.Z - state.E))
        state.s = float(state.rho * np.linalg.norm(state.E - E_prev))

        obj = objective(X, H, state.Z, config.alpha)
        state.objective_trace.append(obj)
        entry = TraceEntry(
            iteration=it,
            objective=obj,
            lagrangian=lagrangian(X, H, state, config.alpha),
            r=state.r,
            s=state.s,
            rho=state.rho,
            combined_residual=combined_residual(state.r, state.s, state.rho),
        )
        trace.append(entry)
        if on_iteration is not None:
            on_iteration(entry)
        logger.debug("ADMM iter %d: obj=%.6e r=%.3e s=%.3e rho=%.4g", it, obj, state.r, state.s, state.rho)

        if max(state.r, state.s) < config.eps:
            converged = True
            break
        update_rho(state, config.rho_beta, config.rho_tau, config.rho_period)

    iterations = len(trace)
    if converged:
        logger.info("ADMM converged in %d iterations (r=%.2e, s=%.2e)", iterations, state.r, state.s)
    else:
        logger.warning(
            "ADMM stopped at K=%d without reaching eps=%.1e (r=%.2e, s=%.2e)",
            config.max_iter, config.eps, state.r, state.s,
        )
    return SolveResult(
        graph=_export_graph(state.Z),
        trace=trace,
        converged=converged,
        iterations=iterations,
        final_rho=state.rho,
    )
