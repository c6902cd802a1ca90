"""Numerical tolerances, with overrides from the ``SPINWIRE_TOLERANCES`` variable.

The variable holds comma separated ``name=value`` pairs, e.g.::

    SPINWIRE_TOLERANCES="hermitian=1e-10,zero_ratio=1e-5"
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

ENV_VAR = "SPINWIRE_TOLERANCES"


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12  # relative to max(1, |H|)
    unitarity: float = 1e-10
    state_norm: float = 1e-9
    support: float = 1e-9  # weight allowed outside Alice's subspace
    contraction: float = 1e-10
    degeneracy: float = 1e-9
    arrival_absent: float = 1e-14  # below this C_B no arrival state is reported
    imag_residue: float = 1e-9  # reality of derived control values
    imag_abort: float = 1e-6
    zero_ratio: float = 1e-4  # |phi| below this makes J = psi/phi a 0/0 case
    control_bound: float = 1e-9  # |J| - 1 above this counts as a clamp event
    psd: float = 1e-10

    def with_overrides(self, spec: str | None) -> Tolerances:
        if not spec:
            return self
        known = {f.name for f in fields(self)}
        updates = {}
        for item in spec.split(","):
            item = item.strip()
            if not item:
                continue
            name, sep, value = item.partition("=")
            name = name.strip()
            if not sep or name not in known:
                raise ConfigError(f"bad tolerance override {item!r}")
            try:
                updates[name] = float(value)
            except ValueError:
                raise ConfigError(f"bad tolerance value in {item!r}") from None
        return replace(self, **updates)


def default_tolerances() -> Tolerances:
    """Defaults merged with the environment override, read at call time."""
    return Tolerances().with_overrides(os.environ.get(ENV_VAR))
