from __future__ import annotations

from dataclasses import dataclass

SPEED_OF_LIGHT = 2.99792458e8  # m/s


@dataclass(frozen=True)
class RadarParams:
    """Radar timing and sweep parameters shared by all processing stages.

    ``T`` is the pulse width (or FMCW sweep period), ``delta_f`` the signed chirp
    bandwidth and ``sample_rate`` the simulation grid rate.
    """

    prf: float
    T: float
    delta_f: float
    f0: float = 0.0
    f_carrier: float = 60e6
    sample_rate: float = 240e6
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.prf > 0:
            raise ValueError(f"prf must be positive, got {self.prf}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.prf * self.T > 1 + 1e-12:
            raise ValueError(
                f"prf*T = {self.prf * self.T:g} > 1: the pulse does not fit in the repetition interval"
            )
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")

    @property
    def unambiguous_range(self) -> float:
        return self.c / (2 * self.prf)

    @property
    def range_bin(self) -> float:
        """Range resolution c / (2|delta_f|) in meters."""
        self._need_bandwidth()
        return self.c / (2 * abs(self.delta_f))

    @property
    def beat_to_range(self) -> float:
        """Meters of range per Hz of beat frequency, c*T / (2|delta_f|)."""
        self._need_bandwidth()
        return self.c * self.T / (2 * abs(self.delta_f))

    @property
    def chirp_sign(self) -> int:
        self._need_bandwidth()
        return 1 if self.delta_f > 0 else -1

    def _need_bandwidth(self) -> None:
        if self.delta_f == 0:
            raise ValueError("delta_f is zero: range and Doppler scales are undefined")
