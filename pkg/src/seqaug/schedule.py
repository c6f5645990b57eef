"""Cosine annealing learning-rate schedule with warm restarts.

Cycle c (0-based) lasts t0 * t_mult**c epochs.  Within a cycle the rate
falls from lr0 at fraction 0 to eta_min at fraction 1 on a half cosine,
then snaps back to lr0 at the next restart.  With t0=1, t_mult=2 the
cycles end after cumulative epochs 1, 3, 7, 15, 31, 63, 127, ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class CosineRestarts:
    lr0: float = 0.01
    t0: int = 1
    t_mult: int = 2
    eta_min: float = 0.0

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be positive, got {self.lr0}")
        if self.t0 < 1 or self.t_mult < 1:
            raise ConfigError(f"t0 and t_mult must be >= 1, got t0={self.t0} t_mult={self.t_mult}")
        if not 0 <= self.eta_min < self.lr0:
            raise ConfigError(f"eta_min must be in [0, lr0), got {self.eta_min}")

    def lr_at(self, fraction: float, cycle: int = 0) -> float:
        """Rate at `fraction` in [0, 1] through cycle `cycle`.

        Every cycle spans the same [lr0, eta_min] range, so `cycle` only
        bounds-checks; fraction 0 gives lr0 exactly, fraction 1 eta_min.
        """
        if not 0.0 <= fraction <= 1.0:
            raise ConfigError(f"fraction must be in [0, 1], got {fraction}")
        if cycle < 0:
            raise ConfigError(f"cycle must be >= 0, got {cycle}")
        return self.eta_min + 0.5 * (self.lr0 - self.eta_min) * (1.0 + math.cos(math.pi * fraction))

    def cycle_of(self, epoch: int) -> tuple[int, int, int]:
        """Locate 0-based `epoch`: returns (cycle index, epoch within cycle, cycle length)."""
        if epoch < 0:
            raise ConfigError(f"epoch must be >= 0, got {epoch}")
        start, length, cycle = 0, self.t0, 0
        while epoch >= start + length:
            start += length
            length *= self.t_mult
            cycle += 1
        return cycle, epoch - start, length

    def epoch_lr(self, epoch: int) -> float:
        """Rate applied during 0-based `epoch`: fraction e/T within its cycle.

        The first epoch of every cycle trains at lr0; the rate never quite
        reaches eta_min because the restart lands first.
        """
        cycle, within, length = self.cycle_of(epoch)
        return self.lr_at(within / length, cycle)

    def restart_epochs(self, horizon: int) -> list[int]:
        """0-based epochs at which the rate resets to lr0, up to `horizon` epochs."""
        out, start, length = [], 0, self.t0
        while start < horizon:
            out.append(start)
            start += length
            length *= self.t_mult
        return out

    def cycle_end_epochs(self, horizon: int) -> list[int]:
        """Cumulative epoch counts at which cycles complete, up to `horizon`.

        With the defaults this is [1, 3, 7, 15, 31, 63, 127, ...]: after
        `end` epochs total, a cycle has just finished.
        """
        out, start, length = [], 0, self.t0
        while start + length <= horizon:
            start += length
            out.append(start)
            length *= self.t_mult
        return out
