"""Central tolerance table.

Every check in the package reads its threshold from ``TOL``; reports echo
the table so results can be reproduced with the same settings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    construction: float = 1e-12  # Riem4 / Sym2 symmetry after construction
    cross_identity: float = 1e-11  # relative, identities between derived quantities
    trace_reject: float = 1e-10  # Weyl input trace, Ric/Rm consistency
    spd_min_eig: float = 1e-10
    jacobi: float = 1e-12
    einstein: float = 1e-10  # |E| below this is Einstein (classification)
    classify_residual: float = 1e-8
    classify_spectrum: float = 1e-8
    solve_grad: float = 1e-10
    solve_full_residual: float = 1e-8
    reduction_mismatch: float = 1e-6
    dedup: float = 1e-6
    solver_einstein: float = 1e-8

    def as_dict(self) -> dict:
        return asdict(self)

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


TOL = Tolerances()
