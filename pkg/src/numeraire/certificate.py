"""Named check results and the finiteness flags attached to them."""

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Check:
    """One verified condition: it passes iff ``residual <= tol``."""

    name: str
    residual: float
    tol: float
    passed: bool
    witness: object = None

    @classmethod
    def from_residual(cls, name, residual, tol, witness=None):
        residual = float(residual)
        return cls(name, residual, float(tol), bool(residual <= tol), witness)

    def as_record(self):
        return {"name": self.name, "residual": self.residual, "tol": self.tol,
                "pass": self.passed}


@dataclass(frozen=True)
class FinitenessFlags:
    """Absolute-continuity and finiteness properties of a solved instance.

    Tri-state fields are ``True``, ``False`` or ``None`` (undetermined).
    """

    q_ac_wrt_null: object = None
    numeraire_finite: object = None
    ripr_ac_wrt_q: bool = True
    q_ac_wrt_ripr: object = None
    entropy_finite: object = None

    def consistent(self):
        """Whether the determined flags fit one of the admissible patterns."""
        if self.ripr_ac_wrt_q is not True:
            return False
        known = [v for v in (self.q_ac_wrt_null, self.numeraire_finite, self.q_ac_wrt_ripr)
                 if v is not None]
        if len(set(known)) > 1:
            return False
        if False in known and self.entropy_finite is True:
            return False
        return True

    def as_record(self):
        return {"q_ac_wrt_null": self.q_ac_wrt_null, "numeraire_finite": self.numeraire_finite,
                "ripr_ac_wrt_q": self.ripr_ac_wrt_q, "q_ac_wrt_ripr": self.q_ac_wrt_ripr,
                "entropy_finite": self.entropy_finite}


@dataclass(frozen=True)
class Certificate:
    checks: tuple = ()
    flags: FinitenessFlags = field(default_factory=FinitenessFlags)
    notes: tuple = ()

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.overall_pass

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name):
        return any(c.name == name for c in self.checks)

    @property
    def names(self):
        return [c.name for c in self.checks]

    @property
    def max_residual(self):
        return max((c.residual for c in self.checks), default=-np.inf)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def merged(self, *others, flags=None):
        checks = list(self.checks)
        notes = list(self.notes)
        for other in others:
            checks.extend(other.checks)
            notes.extend(other.notes)
        return Certificate(tuple(checks), flags or self.flags, tuple(notes))

    def with_flags(self, flags):
        return replace(self, flags=flags)

    def to_records(self):
        return [c.as_record() for c in self.checks]
