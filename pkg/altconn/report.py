import csv
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence, TextIO

from gfp import FieldSpec

from .bounds import RateReport
from .config import ExperimentConfig
from .jess import JessReport
from .states import StateId
from .sweep import SweepRow

__all__ = ['SCHEMA_VERSION', 'SWEEP_COLUMNS', 'ReportRecord', 'write_sweep_csv']

SCHEMA_VERSION = 1

SWEEP_COLUMNS = (['point', 'value'] + [f'lambda_{s}' for s in StateId]
                 + ['lambda', 'capacity', 'achieved', 'genie_B', 'genie_rest', 'ok'])


def _rate(spcu: Fraction, spec: FieldSpec) -> dict[str, Any]:
    return {'num': spcu.numerator, 'den': spcu.denominator, 'bits': float(spcu) * spec.rate_unit}


def _summary(report: RateReport) -> dict[str, Any]:
    return {
        'n': report.n,
        'blocks': report.blocks,
        'symbols': report.symbols,
        'rate': _rate(report.achieved_spcu, report.spec),
        'verdicts': list(report.verdicts),
        'checks': report.checks(),
    }


@dataclass
class ReportRecord:
    """A run's JSON report. Every field is a plain JSON value so that
    reading a written report back gives an equal record."""
    kind: str
    config: dict[str, Any]
    blocks: int = 0
    symbols: int = 0
    rate: dict[str, Any] = field(default_factory=dict)
    capacity: Optional[dict[str, Any]] = None
    bounds: list[dict[str, Any]] = field(default_factory=list)
    verdicts: list[bool] = field(default_factory=list)
    state_split: dict[str, dict[str, int]] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    repetitions: Optional[list[dict[str, Any]]] = None
    details: Optional[dict[str, Any]] = None
    schema_version: int = SCHEMA_VERSION

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @classmethod
    def from_rate_report(cls,
                         cfg: ExperimentConfig,
                         report: RateReport,
                         wall_clock_s: float,
                         repetitions: Sequence[RateReport] = ()) -> 'ReportRecord':
        spec = cfg.spec
        return cls(kind=cfg.kind,
                   config=cfg.to_dict(),
                   blocks=report.blocks,
                   symbols=report.symbols,
                   rate=_rate(report.achieved_spcu, spec),
                   capacity=_rate(report.capacity_spcu, spec),
                   bounds=[{'name': b.name, **_rate(b.spcu, spec)} for b in report.bounds],
                   verdicts=list(report.verdicts),
                   state_split={str(s): {'blocks': report.state_split[s][0],
                                         'fallback': report.state_split[s][1]}
                                for s in StateId if s < len(report.state_split)},
                   checks=report.checks(),
                   wall_clock_s=wall_clock_s,
                   repetitions=[_summary(r) for r in repetitions] if len(repetitions) > 1 else None)

    @classmethod
    def from_jess(cls,
                  cfg: ExperimentConfig,
                  report: JessReport,
                  wall_clock_s: float) -> 'ReportRecord':
        checks = {'decoded': report.verdict}
        if cfg.include_resolving_state:
            checks['complete'] = report.complete
        else:
            checks['unresolved_one_per_receiver'] = report.unresolved == 3

        return cls(kind=cfg.kind,
                   config=cfg.to_dict(),
                   symbols=report.decoded,
                   rate=_rate(report.rate, cfg.spec),
                   verdicts=[len(r) == 3 for r in report.recovered],
                   checks=checks,
                   wall_clock_s=wall_clock_s,
                   details={'uses': report.uses,
                            'sent': report.symbols,
                            'decoded': report.decoded,
                            'unresolved': report.unresolved,
                            'recovered': [dict(r) for r in report.recovered]})

    @classmethod
    def from_sweep(cls,
                   cfg: ExperimentConfig,
                   rows: Sequence[SweepRow],
                   wall_clock_s: float) -> 'ReportRecord':
        checks = {f'point_{r.point}': r.ok for r in rows}
        return cls(kind=cfg.kind,
                   config=cfg.to_dict(),
                   blocks=sum(r.report.blocks for r in rows),
                   symbols=sum(r.report.symbols for r in rows),
                   checks=checks,
                   verdicts=[r.report.verdict for r in rows],
                   wall_clock_s=wall_clock_s,
                   details={'points': [_sweep_fields(r) for r in rows]})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, ensure_ascii=False) + '\n'

    @classmethod
    def from_json(cls, s: str) -> 'ReportRecord':
        data = json.loads(s)
        version = data.get('schema_version')
        if version != SCHEMA_VERSION:
            raise ValueError(f'Unsupported report schema version {version!r}')

        return cls(**data)


def _sweep_fields(row: SweepRow) -> dict[str, Any]:
    report = row.report
    res: dict[str, Any] = {'point': row.point, 'value': float(row.value)}
    for s in StateId:
        res[f'lambda_{s}'] = float(row.dist[s])

    genie_b = report.bound('genie-B')
    genie_rest = report.bound('genie-rest')
    res.update({
        'lambda': float(row.lam),
        'capacity': float(row.capacity_spcu),
        'achieved': float(report.achieved_spcu),
        'genie_B': None if genie_b is None else float(genie_b.spcu),
        'genie_rest': None if genie_rest is None else float(genie_rest.spcu),
        'ok': row.ok,
    })
    return res


def write_sweep_csv(rows: Sequence[SweepRow], f: TextIO) -> None:
    """One row per grid point, rates in symbols per channel use."""
    writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(_sweep_fields(row))
