from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances used across modules.

    ``compatibility`` bounds |<Q^j> - v^j| for membership in a macrostate,
    ``trace_norm`` is the separate state-distance tolerance (the two are
    never combined into one metric).
    """

    compatibility: float = 1e-10
    normalization: float = 1e-12
    hermiticity: float = 1e-12
    psd: float = 1e-10
    fit: float = 1e-10
    decision: float = 1e-9
    trace_norm: float = 1e-10
    sample_retries: int = 10_000

    def __post_init__(self):
        for name in ("compatibility", "normalization", "hermiticity", "psd",
                     "fit", "decision", "trace_norm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name!r} must be positive")
        if self.sample_retries < 1:
            raise ValueError("sample_retries must be >= 1")


DEFAULT_TOL = ToleranceConfig()
