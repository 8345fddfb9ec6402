"""Input-layer neuron layouts: homogeneous, odd-even (HNL) and random heterogeneous (RHNL)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import ParameterError
from .seeding import derive_rng


class NeuronKind(str, Enum):
    GLS = "GLS"
    LOGISTIC = "Logistic"


class Scheme(str, Enum):
    HOMOGENEOUS_GLS = "HomogeneousGLS"
    HOMOGENEOUS_LOGISTIC = "HomogeneousLogistic"
    ODD_EVEN = "OddEven"
    RANDOM_HETEROGENEOUS = "RandomHeterogeneous"


@dataclass(frozen=True)
class NeuronLayout:
    kinds: tuple[NeuronKind, ...]
    scheme: Scheme
    proportion_logistic: float
    seed: int

    @property
    def n(self) -> int:
        return len(self.kinds)

    @property
    def logistic_mask(self) -> np.ndarray:
        return np.array([k is NeuronKind.LOGISTIC for k in self.kinds], dtype=bool)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "n": self.n,
            "proportion_logistic": self.proportion_logistic,
            "seed": self.seed,
            "kinds": [k.value for k in self.kinds],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NeuronLayout":
        kinds = tuple(NeuronKind(k) for k in data["kinds"])
        if len(kinds) != data.get("n", len(kinds)):
            raise ParameterError("layout 'n' does not match the number of kinds")
        return cls(kinds, Scheme(data["scheme"]), float(data["proportion_logistic"]), int(data["seed"]))

    def permuted(self, order) -> "NeuronLayout":
        """Layout whose position ``j`` holds this layout's neuron ``order[j]``."""
        return NeuronLayout(tuple(self.kinds[i] for i in order), self.scheme, self.proportion_logistic, self.seed)


def round_half_up(x: float) -> int:
    # Round to 9 decimals first so 0.3 * 5 style products do not land at 1.4999...
    return math.floor(round(x, 9) + 0.5)


def logistic_count(n: int, proportion_logistic: float) -> int:
    return round_half_up(proportion_logistic * n)


def build_layout(
    n: int,
    scheme: Scheme | str,
    proportion_logistic: float = 0.0,
    seed: int = 0,
) -> NeuronLayout:
    """Build the neuron layout for an ``n``-feature input layer.

    For the random heterogeneous scheme, ``round_half_up(p * n)`` positions are
    drawn uniformly without replacement from the seed's layout stream and set to
    logistic neurons; everything else is GLS.  ``proportion_logistic`` is
    ignored by the other schemes.
    """
    scheme = Scheme(scheme)
    if n < 1:
        raise ParameterError(f"layout needs at least one neuron, got n={n}")
    if not 0.0 <= proportion_logistic <= 1.0:
        raise ParameterError(f"proportion_logistic must lie in [0, 1], got {proportion_logistic}")

    if scheme is Scheme.HOMOGENEOUS_GLS:
        kinds = (NeuronKind.GLS,) * n
        p = 0.0
    elif scheme is Scheme.HOMOGENEOUS_LOGISTIC:
        kinds = (NeuronKind.LOGISTIC,) * n
        p = 1.0
    elif scheme is Scheme.ODD_EVEN:
        # 1-based odd positions are GLS, i.e. 0-based even indices.
        kinds = tuple(NeuronKind.GLS if j % 2 == 0 else NeuronKind.LOGISTIC for j in range(n))
        p = (n // 2) / n
    else:
        p = float(proportion_logistic)
        count = logistic_count(n, p)
        rng = derive_rng(seed, "layout")
        chosen = set(rng.choice(n, size=count, replace=False).tolist())
        kinds = tuple(NeuronKind.LOGISTIC if j in chosen else NeuronKind.GLS for j in range(n))
    return NeuronLayout(kinds, scheme, p, int(seed))


_RH_NAME = re.compile(r"^RH(\d{1,3})L(\d{1,3})G$", re.IGNORECASE)

_NAMED = {
    "GLS": (Scheme.HOMOGENEOUS_GLS, 0.0),
    "CHAOSFEX": (Scheme.HOMOGENEOUS_GLS, 0.0),
    "LOGISTIC": (Scheme.HOMOGENEOUS_LOGISTIC, 1.0),
    "HNL": (Scheme.ODD_EVEN, 0.5),
    "HETERO": (Scheme.ODD_EVEN, 0.5),
    "ODDEVEN": (Scheme.ODD_EVEN, 0.5),
}


def parse_architecture(name: str) -> tuple[Scheme, float]:
    """Map an architecture label such as ``RH25L75G`` or ``HNL`` to ``(scheme, proportion)``.

    ``RH<a>L<b>G`` means ``a`` percent logistic neurons.  The GLS share is
    implied, so mislabeled names like ``RH25L50G`` resolve to 25 percent logistic.
    Labels of the form ``RH:<p>`` take an explicit proportion in [0, 1].
    """
    key = name.strip()
    if key.upper().startswith("RH:"):
        return Scheme.RANDOM_HETEROGENEOUS, float(key[3:])
    m = _RH_NAME.match(key)
    if m:
        pct = int(m.group(1))
        if pct > 100:
            raise ParameterError(f"bad architecture {name!r}")
        return Scheme.RANDOM_HETEROGENEOUS, pct / 100.0
    upper = key.upper().replace("_", "").replace("-", "")
    if upper in _NAMED:
        return _NAMED[upper]
    fixed = {Scheme.HOMOGENEOUS_GLS: 0.0, Scheme.HOMOGENEOUS_LOGISTIC: 1.0, Scheme.ODD_EVEN: 0.5}
    for scheme, p in fixed.items():
        if scheme.value.upper() == upper:
            return scheme, p
    raise ParameterError(f"unknown architecture {name!r}")


def canonical_name(scheme: Scheme, proportion_logistic: float) -> str:
    if scheme is Scheme.HOMOGENEOUS_GLS:
        return "GLS"
    if scheme is Scheme.HOMOGENEOUS_LOGISTIC:
        return "Logistic"
    if scheme is Scheme.ODD_EVEN:
        return "HNL"
    pct = round_half_up(proportion_logistic * 100)
    if abs(pct - proportion_logistic * 100) < 1e-9:
        return f"RH{pct}L{100 - pct}G"
    return f"RH:{proportion_logistic:g}"
