from dataclasses import dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs shared by every module.

    ``eps_point`` is a chordal radius on the sphere, ``eps_rank`` a singular
    value cutoff relative to the largest one, ``eps_residual`` the maximal
    misfit accepted by least-squares fits.  With a fixed ``rng_seed`` every
    output is deterministic.
    """

    eps_point: float = 1e-7
    eps_rank: float = 1e-8
    eps_residual: float = 1e-8
    max_root_iterations: int = 500
    rng_seed: int = 0
    # multiplier classification
    q_max: int = 24
    unity_tol: float = 1e-6
    # iterate(f, k) refuses degrees above this
    degree_cap: int = 4096

    def __post_init__(self):
        for name in ("eps_point", "eps_rank", "eps_residual", "unity_tol"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if self.max_root_iterations < 1:
            raise ValueError("max_root_iterations must be positive")
        if self.q_max < 1 or self.degree_cap < 1:
            raise ValueError("q_max and degree_cap must be positive")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = Tolerances()
