"""
Sweep output: the per-row CSV, grouped summaries and paired mode comparisons.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from scipy import stats

from problem.instance import PhaseConstraint

from .runner import SOLVER_AO, SOLVER_BB, SOLVERS, Mode, SweepRow

logger = logging.getLogger('beamforming')

CSV_COLUMNS = [
    'trial', 'N', 'K', 'solver', 'constraint', 'objective',
    'snr_floor', 'gap', 'nodes', 'wall_time_s', 'status',
]
FLOAT_FORMAT = '%.12g'
GROUP_KEYS = ['N', 'K', 'solver', 'constraint']
CONFIDENCE = 0.95
DOMINANCE_RTOL = 1e-9


def rows_frame(rows: list[SweepRow], omit_timing: bool = False) -> pd.DataFrame:
    frame = pd.DataFrame([asdict(row) for row in rows], columns=CSV_COLUMNS)
    if omit_timing:
        frame['wall_time_s'] = 0.0
    return frame


def write_sweep_csv(rows: list[SweepRow], path, omit_timing: bool = False) -> pd.DataFrame:
    """One line per row; floats at 12 significant digits, +∞ written as 'inf'."""
    frame = rows_frame(rows, omit_timing)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info(f"Wrote {len(frame)} sweep rows to {path}")
    return frame


def _half_width(std: float, count: int) -> float:
    if count < 2:
        return math.nan
    return float(stats.t.ppf(0.5 + CONFIDENCE / 2, count - 1) * std / math.sqrt(count))


def summarize_rows(rows: list[SweepRow]) -> pd.DataFrame:
    """
    Mean, sample std and 95% confidence half-width of the objective and SNR
    floor per (N, K, solver, constraint).

    Rows with a nulled user or an error are counted under `excluded` and left
    out of the statistics.
    """
    frame = rows_frame(rows)
    finite = frame['objective'].map(lambda v: math.isfinite(float(v)))
    records = []
    for keys, group in frame.groupby(GROUP_KEYS, sort=True):
        usable = group[finite.loc[group.index]]
        count = len(usable)
        record = dict(zip(GROUP_KEYS, keys))
        record['trials'] = len(group)
        record['excluded'] = len(group) - count
        for column in ('objective', 'snr_floor'):
            values = usable[column].astype(np.float64)
            mean = float(values.mean()) if count else math.nan
            std = float(values.std(ddof=1)) if count > 1 else math.nan
            record[f'{column}_mean'] = mean
            record[f'{column}_std'] = std
            record[f'{column}_ci95'] = _half_width(std, count)
        records.append(record)
    return pd.DataFrame.from_records(records)


def write_summary_csv(rows: list[SweepRow], path) -> pd.DataFrame:
    summary = summarize_rows(rows)
    summary.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return summary


@dataclass(frozen=True)
class PairedComparison:
    lower: str
    higher: str
    pairs: int
    mean_difference: float
    statistic: float
    p_value: float

    @property
    def holds(self) -> bool:
        """True when `lower` has the smaller mean objective at 95% confidence."""
        return self.pairs > 1 and self.mean_difference < 0 and self.p_value < 1 - CONFIDENCE


def _paired_objectives(rows: list[SweepRow], lower: Mode, higher: Mode, N: int | None = None) -> pd.DataFrame:
    """Objectives of two modes joined on their shared (trial, N, K) cells."""
    frame = rows_frame(rows)
    if N is not None:
        frame = frame[frame['N'] == N]
    cells = ['trial', 'N', 'K']

    def side(mode: Mode) -> pd.DataFrame:
        picked = frame[(frame['solver'] == mode.solver) & (frame['constraint'] == mode.constraint.tag)]
        return picked[cells + ['objective']].astype({'objective': np.float64})

    return side(lower).merge(side(higher), on=cells, suffixes=('_lower', '_higher'))


def paired_ordering(rows: list[SweepRow], lower: Mode, higher: Mode, N: int | None = None) -> PairedComparison:
    """
    One-sided paired t-test of objective(lower) < objective(higher) over the
    (trial, N, K) cells both modes solved with a finite objective.
    """
    paired = _paired_objectives(rows, lower, higher, N)
    paired = paired[np.isfinite(paired['objective_lower']) & np.isfinite(paired['objective_higher'])]
    difference = (paired['objective_lower'] - paired['objective_higher']).to_numpy()
    if difference.size < 2:
        return PairedComparison(lower.tag, higher.tag, int(difference.size), math.nan, math.nan, math.nan)
    if np.all(difference == difference[0]):
        # zero variance: the test statistic is undefined
        p_value = 0.0 if difference[0] < 0 else 1.0
        return PairedComparison(lower.tag, higher.tag, int(difference.size), float(difference[0]), math.nan, p_value)
    result = stats.ttest_rel(paired['objective_lower'], paired['objective_higher'], alternative='less')
    return PairedComparison(
        lower=lower.tag,
        higher=higher.tag,
        pairs=int(difference.size),
        mean_difference=float(np.mean(difference)),
        statistic=float(result.statistic),
        p_value=float(result.pvalue),
    )


@dataclass(frozen=True)
class Dominance:
    exact: str
    heuristic: str
    pairs: int
    violations: int

    @property
    def holds(self) -> bool:
        return self.pairs > 0 and self.violations == 0


def dominance(rows: list[SweepRow], exact: Mode, heuristic: Mode, rtol: float = DOMINANCE_RTOL) -> Dominance:
    """Count the shared cells where `exact` ends above `heuristic` by more than rtol."""
    paired = _paired_objectives(rows, exact, heuristic)
    lower, higher = paired['objective_lower'].to_numpy(), paired['objective_higher'].to_numpy()
    slack = rtol * np.maximum(1.0, np.abs(higher))
    above = (lower > higher + slack) & ~(np.isinf(lower) & np.isinf(higher))
    return Dominance(exact.tag, heuristic.tag, len(paired), int(np.count_nonzero(above)))


def mean_by_N(rows: list[SweepRow], mode: Mode, K: int | None = None) -> pd.Series:
    """Mean finite objective of one mode per N, ascending in N."""
    frame = rows_frame(rows)
    picked = frame[(frame['solver'] == mode.solver) & (frame['constraint'] == mode.constraint.tag)]
    if K is not None:
        picked = picked[picked['K'] == K]
    values = picked['objective'].astype(np.float64)
    picked = picked[np.isfinite(values)]
    return picked.groupby('N')['objective'].mean().astype(np.float64).sort_index()


def is_strictly_decreasing(series: pd.Series) -> bool:
    return len(series) > 1 and bool(np.all(np.diff(series.to_numpy()) < 0))


def row_modes(rows: list[SweepRow]) -> list[Mode]:
    """Distinct modes in first-appearance order."""
    seen = {}
    for row in rows:
        mode = Mode(row.solver, PhaseConstraint.parse(row.constraint))
        seen.setdefault(mode, None)
    return list(seen)


def _fineness(mode: Mode) -> float:
    return math.inf if not mode.constraint.is_discrete else float(mode.constraint.levels)


def phase_orderings(modes: list[Mode]) -> list[tuple[Mode, Mode]]:
    """(finer, coarser) pairs of adjacent phase classes for each solver, e.g. continuous before mary4 before binary."""
    pairs = []
    for solver in SOLVERS:
        ranked = sorted((m for m in modes if m.solver == solver), key=_fineness, reverse=True)
        pairs.extend(zip(ranked, ranked[1:]))
    return pairs


def trend_report(rows: list[SweepRow]) -> list[str]:
    """
    Plain-text checks over a sweep: per-K mean objective against N, the
    paired phase-class ordering within each solver and BB against AO per
    phase class.
    """
    modes = row_modes(rows)
    K_values = sorted({row.K for row in rows})
    lines = []
    for mode in modes:
        for K in K_values:
            means = mean_by_N(rows, mode, K)
            if len(means) < 2:
                continue
            listed = ' '.join(f"N={N}:{value:.6g}" for N, value in means.items())
            verdict = 'decreasing' if is_strictly_decreasing(means) else 'not decreasing'
            lines.append(f"trend {mode.tag} K={K}: {listed} ({verdict})")
    for finer, coarser in phase_orderings(modes):
        result = paired_ordering(rows, finer, coarser)
        verdict = 'holds' if result.holds else 'not significant'
        lines.append(
            f"ordering {finer.tag} < {coarser.tag}: pairs={result.pairs} "
            f"mean_diff={result.mean_difference:.6g} p={result.p_value:.3g} ({verdict})"
        )
    for mode in modes:
        if mode.solver != SOLVER_BB:
            continue
        heuristic = Mode(SOLVER_AO, mode.constraint)
        if heuristic not in modes:
            continue
        result = dominance(rows, mode, heuristic)
        lines.append(
            f"dominance {result.exact} <= {result.heuristic}: "
            f"{result.violations} violation(s) over {result.pairs} pairs"
        )
    return lines
