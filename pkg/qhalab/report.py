"""Results of checks and convergence studies.

A :class:`Report` is a list of :class:`Record` values, one per identity
checked, together with the tables of any convergence studies and an echo
of the configuration that produced them.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple


@dataclass
class Record:
    """One checked identity."""
    #: Stable identifier, such as ``conv.toeplitz_as_convolution``.
    identity: str
    #: The identity being checked, written out.
    anchor: str
    #: Measured error. ``nan`` when the check could not be evaluated.
    error: float
    #: Tolerance the error is compared against.
    tolerance: float
    #: Free-form notes: warnings raised, truncation diagnostics, exceptions.
    diagnostics: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not math.isnan(self.error) and self.error <= self.tolerance

    def to_dict(self) -> Dict:
        return {
            'identity': self.identity,
            'anchor': self.anchor,
            'error': None if math.isnan(self.error) else self.error,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'diagnostics': list(self.diagnostics)
        }


@dataclass
class ErrorTable:
    """Errors indexed by a study parameter and a test-vector index."""
    #: Table name, used as the CSV file stem.
    name: str
    #: Name of the varied parameter, ``t`` or ``N``.
    parameter: str = 't'
    #: Rows of ``(parameter value, index, error)``.
    rows: List[Tuple[float, int, float]] = field(default_factory=list)

    def add(self, value: float, index: int, error: float):
        self.rows.append((float(value), int(index), float(error)))

    @property
    def parameters(self) -> List[float]:
        seen = []
        for value, _, _ in self.rows:
            if value not in seen:
                seen.append(value)
        return seen

    def errors(self, value: float) -> List[float]:
        return [e for v, _, e in self.rows if v == value]

    def worst(self, value: float) -> float:
        """Largest error over the test vectors at one parameter value."""
        return max(self.errors(value), default=0.0)

    @property
    def first(self) -> float:
        return self.worst(self.parameters[0]) if self.rows else 0.0

    @property
    def final(self) -> float:
        return self.worst(self.parameters[-1]) if self.rows else 0.0

    def improves(self, floor: float = 0.0) -> bool:
        """``True`` if, for every test vector, the last parameter value does
        better than the first or ends at or below `floor`.

        No step-by-step monotonicity is required.
        """
        values = self.parameters
        if len(values) < 2:
            return True
        first, final = self.errors(values[0]), self.errors(values[-1])
        return all(b < a or b <= floor for a, b in zip(first, final))

    def is_monotone(self, floor: float = 0.0) -> bool:
        """``True`` if the worst error never increases along the rows.

        Steps ending at or below `floor` are not counted as increases.
        """
        worst = [self.worst(v) for v in self.parameters]
        return all(b <= a or b <= floor for a, b in zip(worst, worst[1:]))

    def header(self) -> Tuple[str, str, str]:
        return (self.parameter, 'index', 'error')

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'columns': list(self.header()),
            'rows': [list(row) for row in self.rows]
        }


@dataclass
class Report:
    """The outcome of one suite or study run."""
    suite: str
    records: List[Record] = field(default_factory=list)
    tables: List[ErrorTable] = field(default_factory=list)
    #: Configuration, profile version and seeds echoed for reproducibility.
    environment: Dict[str, Any] = field(default_factory=dict)
    #: Wall-clock seconds per check. Kept apart so reports of identical runs
    #: differ only here.
    timing: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> List[Record]:
        return [record for record in self.records if not record.passed]

    def record(self, identity: str, anchor: str, error: float,
               tolerance: float,
               diagnostics: Optional[Sequence[str]] = None) -> Record:
        result = Record(
            identity=identity,
            anchor=anchor,
            error=float(error),
            tolerance=float(tolerance),
            diagnostics=list(diagnostics or [])
        )
        self.records.append(result)
        return result

    def table(self, name: str, parameter: str = 't') -> ErrorTable:
        result = ErrorTable(name=name, parameter=parameter)
        self.tables.append(result)
        return result

    def to_dict(self, *, timing: bool = True) -> Dict:
        data = {
            'suite': self.suite,
            'passed': self.passed,
            'environment': self.environment,
            'records': [record.to_dict() for record in self.records],
            'tables': [table.to_dict() for table in self.tables]
        }
        if timing:
            data['timing'] = self.timing
        return data
