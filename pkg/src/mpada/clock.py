"""Shared session clock: monotonic time anchored to the wall-clock RTC once.

Every modality in a session timestamps against the same SharedClock instance,
so all t_ms values are mutually comparable and monotone within the session.

VirtualClock is a drop-in replacement that advances simulated time instead of
sleeping, with a configurable wakeup-latency model. It lets scheduling logic
be exercised deterministically and at full speed regardless of how punctual
the host's own scheduler happens to be.
"""

from __future__ import annotations

import random
import threading
import time

SPIN_THRESHOLD_MS = 2.0


def sleep_until(deadline_monotonic_ms: float):
    """Coarse sleep to deadline - 2 ms, then spin; bounds scheduler jitter
    without RTOS features."""
    while True:
        remaining = deadline_monotonic_ms - time.monotonic() * 1000.0
        if remaining <= 0:
            return
        if remaining > SPIN_THRESHOLD_MS:
            time.sleep((remaining - SPIN_THRESHOLD_MS) / 1000.0)
        else:
            while time.monotonic() * 1000.0 < deadline_monotonic_ms:
                pass
            return


class SharedClock:
    def __init__(self):
        # Anchor once: epoch_ms at the moment monotonic() was sampled.
        self._anchor_ms = time.time() * 1000.0 - time.monotonic() * 1000.0

    def now_ms(self) -> float:
        return self._anchor_ms + time.monotonic() * 1000.0

    def monotonic_ms(self) -> float:
        return time.monotonic() * 1000.0

    def sleep_until(self, deadline_monotonic_ms: float):
        sleep_until(deadline_monotonic_ms)

    # Sleeper bookkeeping is only meaningful for the virtual clock; the real
    # clock ignores it so callers need not special-case.
    def attach_sleeper(self):
        pass

    def detach_sleeper(self):
        pass


def default_wakeup_latency(rng: random.Random) -> float:
    """Wakeup latency in ms for a lightly loaded desktop-class scheduler:
    sub-millisecond typically, with rare few-millisecond excursions."""
    if rng.random() < 0.01:
        return rng.uniform(4.0, 8.0)
    return rng.gammavariate(2.0, 0.4)


class VirtualClock(SharedClock):
    """Discrete-event clock shared by cooperating acquisition threads.

    Time only advances when every attached sleeper is blocked in
    sleep_until(); it then jumps to the earliest pending deadline, and each
    waking thread adds a sampled wakeup latency. Work between ticks costs
    zero simulated time, so timestamp statistics reflect purely the schedule
    plus the latency model.
    """

    def __init__(self, latency_sampler=default_wakeup_latency, seed: int = 0):
        self._cond = threading.Condition()
        self._virtual_ms = 0.0
        self._epoch_ms = time.time() * 1000.0
        self._attached = 0
        self._deadlines: dict[int, float] = {}
        self._latency_sampler = latency_sampler
        self._rng = random.Random(seed)

    def now_ms(self) -> float:
        return self._epoch_ms + self.monotonic_ms()

    def monotonic_ms(self) -> float:
        with self._cond:
            return self._virtual_ms

    def attach_sleeper(self):
        with self._cond:
            self._attached += 1

    def detach_sleeper(self):
        with self._cond:
            self._attached -= 1
            self._cond.notify_all()

    def sleep_until(self, deadline_monotonic_ms: float):
        ident = threading.get_ident()
        with self._cond:
            if deadline_monotonic_ms <= self._virtual_ms:
                return
            self._deadlines[ident] = deadline_monotonic_ms
            self._cond.notify_all()
            while True:
                if (self._deadlines
                        and len(self._deadlines) >= self._attached
                        and self._virtual_ms < min(self._deadlines.values())):
                    self._virtual_ms = min(self._deadlines.values())
                    self._cond.notify_all()
                if self._virtual_ms >= deadline_monotonic_ms:
                    del self._deadlines[ident]
                    if self._latency_sampler is not None:
                        self._virtual_ms += self._latency_sampler(self._rng)
                    self._cond.notify_all()
                    return
                self._cond.wait(timeout=1.0)
