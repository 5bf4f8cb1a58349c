import csv
import json
import logging
import math
import typing as tp
from dataclasses import asdict, dataclass, field
from pathlib import Path as p

from rich.console import Console
from rich.table import Table

from burgulence.errors import ConfigurationError, OutputError

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class LawRecord:
    law_id: str
    measured: float
    stderr: float
    target: float
    tolerance: float
    passed: bool
    window: tp.Optional[tuple[float, float]] = None
    runtime: float = 0.0
    asserted: bool = True
    note: str = ""
    bound: str = "both"     # both: |m - target| <= tol, upper: m <= target + tol, lower: m >= target - tol

    @classmethod
    def check(cls, law_id: str, measured: float, stderr: float, target: float, tolerance: float,
              window: tp.Optional[tuple[float, float]] = None, runtime: float = 0.0, asserted: bool = True,
              note: str = "", bound: str = "both") -> 'LawRecord':
        if bound == "upper":
            passed = measured <= target + tolerance
        elif bound == "lower":
            passed = measured >= target - tolerance
        elif bound == "both":
            passed = abs(measured - target) <= tolerance
        else:
            raise ConfigurationError(f"unknown bound '{bound}' for law {law_id}")
        passed = passed and math.isfinite(measured)
        return cls(law_id, float(measured), float(stderr), float(target), float(tolerance), bool(passed),
                   None if window is None else (float(window[0]), float(window[1])), float(runtime), asserted,
                   note, bound)

    @property
    def failed(self) -> bool:
        return self.asserted and not self.passed

    @classmethod
    def from_dict(cls, d: tp.Mapping[str, tp.Any]) -> 'LawRecord':
        window = d.get('window')
        return cls(d['law_id'], d['measured'], d['stderr'], d['target'], d['tolerance'], d['passed'],
                   None if window is None else (window[0], window[1]), d.get('runtime', 0.0),
                   d.get('asserted', True), d.get('note', ""), d.get('bound', "both"))


@dataclass(slots=True)
class ReportSection:
    """
    laws: one record per checked law
    tables: relative csv path (without suffix) -> {'columns': [...], 'rows': [[...], ...]}
    summary: free-form numbers (diagnostics, fit details, seeds, config echo)
    """
    name: str
    laws: tp.List[LawRecord] = field(default_factory=list)
    tables: tp.Dict[str, tp.Dict[str, tp.Any]] = field(default_factory=dict)
    summary: tp.Dict[str, tp.Any] = field(default_factory=dict)

    def law(self, record: LawRecord) -> None:
        self.laws.append(record)

    def table(self, name: str, columns: tp.Sequence[str], rows: tp.Iterable[tp.Sequence[tp.Any]]) -> None:
        self.tables[name] = {'columns': list(columns), 'rows': [[_plain(v) for v in r] for r in rows]}

    def as_dict(self) -> tp.Dict[str, tp.Any]:
        return {'name': self.name, 'laws': [asdict(r) for r in self.laws], 'tables': self.tables,
                'summary': self.summary}

    @classmethod
    def from_dict(cls, d: tp.Mapping[str, tp.Any]) -> 'ReportSection':
        return cls(d['name'], [LawRecord.from_dict(r) for r in d.get('laws', [])], dict(d.get('tables', {})),
                   dict(d.get('summary', {})))


def _plain(v: tp.Any) -> tp.Any:
    if hasattr(v, 'item'):
        return v.item()
    return v


class AcceptanceReport:
    def __init__(self, sections: tp.Iterable[ReportSection] = ()) -> None:
        self.sections: tp.List[ReportSection] = []
        self._ids: tp.Set[str] = set()
        for s in sections:
            self.add(s)

    def add(self, section: ReportSection) -> None:
        for r in section.laws:
            law_id = f"{section.name}:{r.law_id}"
            if law_id in self._ids:
                raise ConfigurationError(f"law '{law_id}' appears twice in the report")
            self._ids.add(law_id)
        self.sections.append(section)

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def failures(self) -> tp.List[tuple[str, LawRecord]]:
        return [(s.name, r) for s in self.sections for r in s.laws if r.failed]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def as_dict(self) -> tp.Dict[str, tp.Any]:
        return {'passed': not self.failures,
                'failures': [f"{name}:{r.law_id}" for name, r in self.failures],
                'sections': [s.as_dict() for s in self.sections]}

    def rich_table(self) -> Table:
        table = Table(title="acceptance report")
        for col in ("section", "law", "measured", "stderr", "target", "tol", "window", "status"):
            table.add_column(col)
        for s in self.sections:
            for r in s.laws:
                if not r.asserted:
                    status = "[blue]reported"
                elif r.passed:
                    status = "[green]pass"
                else:
                    status = "[red]FAIL"
                window = "" if r.window is None else f"[{r.window[0]:.4g}, {r.window[1]:.4g}]"
                table.add_row(s.name, r.law_id, f"{r.measured:.4g}", f"{r.stderr:.2g}", f"{r.target:.4g}",
                              _tolerance(r), window, status)
        return table


def write_csv(path: p, columns: tp.Sequence[str], rows: tp.Iterable[tp.Sequence[tp.Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def emit_report(sections: tp.Sequence[ReportSection], out: p, console: Console) -> int:
    """
    writes <out>/report.json, <out>/report.txt and every section table as
    <out>/<section>/<table>.csv; returns the exit status (1 iff an asserted law fails)
    """
    report = AcceptanceReport(sections)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for s in report.sections:
            for name, t in s.tables.items():
                write_csv(out / s.name / f"{name}.csv", t['columns'], t['rows'])
            if s.laws:
                write_csv(out / s.name / f"{s.name}.csv",
                          ("law_id", "measured", "stderr", "target", "tolerance", "passed", "asserted", "window_lo", "window_hi"),
                          ((r.law_id, r.measured, r.stderr, r.target, r.tolerance, r.passed, r.asserted,
                            *(r.window if r.window else ("", ""))) for r in s.laws))
        with open(out / "report.json", "w") as f:
            json.dump(report.as_dict(), f, indent=2, sort_keys=True)
        table = report.rich_table()
        with open(out / "report.txt", "w") as f:
            Console(file=f, width=160, no_color=True).print(table)
    except OSError as e:
        raise OutputError(f"cannot write report under {out}: {e.strerror} ({e.filename})") from e
    console.print(table)
    for name, r in report.failures:
        console.print(f"[red]law {name}:{r.law_id} failed: measured {r.measured:.4g}, target {r.target:.4g} +- {r.tolerance:.3g}")
    log.debug(f"report with {len(report)} laws written to {out}")
    return report.exit_code


def _tolerance(r: LawRecord) -> str:
    if r.bound == "upper":
        return f"<= {r.target + r.tolerance:.3g}"
    if r.bound == "lower":
        return f">= {r.target - r.tolerance:.3g}"
    return f"{r.tolerance:.3g}"
