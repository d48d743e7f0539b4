from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class RunConfig:
    """Numerical knobs shared by every solver.

    The defaults are the production settings; tests and the CLI override
    individual fields with :meth:`replace`.
    """

    # eigensolver
    dense_threshold: int = 600
    eig_tol: float = 1e-9
    degeneracy_tol: float = 1e-8
    max_iter: int = 5000
    seed: int = 0
    # sphere conjugate gradient
    cg_gtol: float = 1e-10
    cg_max_iter: int = 10_000
    cg_starts: int = 8
    # self-consistent fields
    z_tol: float = 1e-10
    max_sweeps: int = 500
    damping: float = 0.5
    start_fractions: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    # limits / orchestration
    max_full_dim: int = 50_000
    threads: int = 1
    output_format: str = "text"

    def __post_init__(self):
        for name in ("eig_tol", "degeneracy_tol", "cg_gtol", "z_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.dense_threshold < 1 or self.threads < 1:
            raise ValueError("dense_threshold and threads must be >= 1")
        object.__setattr__(self, "start_fractions", tuple(float(f) for f in self.start_fractions))

    def replace(self, **changes) -> RunConfig:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RunConfig(**values)

    def numerics(self) -> dict:
        """The fields that influence computed values (used as cache metadata)."""
        d = asdict(self)
        for key in ("threads", "output_format", "max_full_dim"):
            d.pop(key)
        d["start_fractions"] = list(d["start_fractions"])
        return d


DEFAULT_CONFIG = RunConfig()
