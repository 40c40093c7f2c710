"""Synthetic srsENB-style corpora with planted pass/fail divergence.

Both classes share one vocabulary everywhere except inside the divergence
window, where fail runs go quiet and the few events they do log come from a
disjoint fault vocabulary. Pass runs log ``rrcConnectionSetupComplete`` at a sampled duration.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .groundtruth import DEFAULT_KEYWORD
from .ingest import MS_PER_DAY, Level, LogRecord

# (layer, level, channel or None, template). "{n}" is a small integer,
# "{x}" a hex rnti. PHY templates carry a subframe and channel.
SHARED_POOL = [
    ("RLC", Level.INFO, None, "DRB1 Tx SDU ({n} B, tx_sdu_queue_len={n})"),
    ("RLC", Level.INFO, None, "DRB1 Rx data PDU SN={n} ({n} B)"),
    ("RLC", Level.DEBUG, None, "SRB1 Tx status PDU - ACK_SN = {n}, N_nack = 0"),
    ("PDCP", Level.INFO, None, "TX DRB1 PDU, integrity=NIA2, encryption=EEA2, SN={n}"),
    ("PDCP", Level.INFO, None, "RX DRB1 SDU, COUNT={n}, bearer active"),
    ("MAC", Level.INFO, None, "SCHED: DL tx rnti={x}, pid={n}, mask=0x3f, dci=(0,{n}), tbs={n}"),
    ("MAC", Level.INFO, None, "SCHED: UL tx rnti={x}, pid={n}, prb=({n},{n}), bsr={n}"),
    ("GTPU", Level.INFO, None, "Rx S1-U PDU teid=0x{n} bytes={n} forwarding to bearer"),
    ("PHY1", Level.INFO, "PDSCH", "l_crb={n}, harq={n}, snr={n}.1 dB, CW0: tbs={n}, mcs={n}, rv=0, crc=OK"),
    ("PHY1", Level.INFO, "PUSCH", "cc=0, rnti={x}, prb=({n},{n}), snr={n}.4 dB, crc=OK, ta={n}"),
    ("PHY0", Level.INFO, "PUCCH", "cc=0, rnti={x}, f=1a, n_pucch={n}, dmrs_corr=0.9, ack=1"),
    ("PHY0", Level.INFO, "PDCCH", "cc=0, rnti={x}, cfi=1, L=2, ncce={n}, dci=1A"),
]

# Disjoint tokens from SHARED_POOL (numbers and rnti excepted).
FAULT_POOL = [
    ("MAC", Level.WARNING, None, "Radio link failure detected maxretx reached user plane stalled"),
    ("RLC", Level.WARNING, None, "Discarding stale retransmission buffer poll timeout expired"),
    ("RRC", Level.ERROR, None, "Unexpected message unknown procedure context mismatch dropped"),
    ("PHY1", Level.WARNING, "PRACH", "preamble repeated backoff escalation missing msg3 grant"),
    ("MAC", Level.ERROR, None, "Scheduler abnormal grant rejected unknown identity fault"),
    ("RRC", Level.WARNING, None, "Guard timer expiry pending reconfiguration aborted fault"),
]

SETUP_LINES = [
    ("RRC", Level.INFO, "Rx UL CCCH rrcConnectionRequest rnti={x} cause=mo-Signalling"),
    ("RRC", Level.INFO, "Tx DL CCCH rrcConnectionSetup rnti={x} srb1 config"),
]
KEYWORD_LINE = ("RRC", Level.INFO, "Rx UL DCCH " + DEFAULT_KEYWORD + " rnti={x} srb1 transaction")


@dataclass
class CorpusSpec:
    n_files: int = 200
    pass_fraction: float = 0.5
    divergence_window_s: tuple[int, int] = (10, 17)
    events_per_second: float = 3.5
    fault_rate_factor: float = 0.1
    duration_s: int = 44
    hex_dump_prob: float = 0.3
    seed: int = 7
    vocab_profile: dict = field(
        default_factory=lambda: {
            "shared": [t[3] for t in SHARED_POOL],
            "fault": [t[3] for t in FAULT_POOL],
        }
    )

    def __post_init__(self):
        self.divergence_window_s = tuple(self.divergence_window_s)
        start, end = self.divergence_window_s
        # start == end is a zero-width window (negative control)
        if not 0 <= start <= end <= 40:
            raise ValueError("divergence window must satisfy 0 <= start <= end <= 40")
        if self.n_files < 2:
            raise ValueError("n_files must be >= 2")
        if not 0 <= self.pass_fraction <= 1:
            raise ValueError("pass_fraction must lie in [0, 1]")
        if self.events_per_second <= 0 or self.fault_rate_factor <= 0:
            raise ValueError("rates must be positive")
        if self.duration_s < 1:
            raise ValueError("duration_s must be >= 1")


def _fill(template: str, rng: np.random.Generator, rnti: int) -> str:
    out = template
    while "{n}" in out:
        out = out.replace("{n}", str(int(rng.integers(0, 64))), 1)
    return out.replace("{x}", f"0x{rnti:x}")


def _hex_dump(rng: np.random.Generator) -> list[str]:
    lines = []
    for off in range(0, int(rng.integers(1, 3)) * 16, 16):
        data = " ".join(f"{b:02x}" for b in rng.integers(0, 256, size=16))
        lines.append(f"             {off:04x}: {data}")
    return lines


def sample_duration(rng: np.random.Generator, limit: int) -> int:
    """Connection setup time: mostly a few seconds, occasionally much later."""
    if rng.random() < 0.8:
        d = 4 + rng.gamma(2.0, 1.5)
    else:
        d = 12 + rng.exponential(8.0)
    return int(min(d, limit))


def generate_file(spec: CorpusSpec, success: bool, rng: np.random.Generator):
    """Return ``(lines, duration_s)`` for one run."""
    start_ms = int(rng.integers(0, MS_PER_DAY))
    rnti = int(rng.integers(0x46, 0x4000))
    w_start, w_end = spec.divergence_window_s
    events: list[tuple[int, list[str]]] = []

    def record(t_ms, layer, level, content, subframe=None, channel=None):
        rec = LogRecord(
            timestamp_ms=(start_ms + t_ms) % MS_PER_DAY,
            layer=layer,
            level=level,
            content=content,
            subframe=subframe,
            channel=channel,
        )
        return rec.to_line()

    # both classes open with the same setup handshake
    events.append((0, [record(0, *SETUP_LINES[0][:2], _fill(SETUP_LINES[0][2], rng, rnti))]))
    t_setup = int(rng.integers(200, 900))
    lines = [record(t_setup, *SETUP_LINES[1][:2], _fill(SETUP_LINES[1][2], rng, rnti))]
    if rng.random() < spec.hex_dump_prob:
        lines += _hex_dump(rng)
    events.append((t_setup, lines))

    duration = None
    if success:
        duration = sample_duration(rng, spec.duration_s - 1)
        t_kw = duration * 1000 + int(rng.integers(0, 1000))
        layer, level, tmpl = KEYWORD_LINE
        lines = [record(t_kw, layer, level, _fill(tmpl, rng, rnti))]
        if rng.random() < spec.hex_dump_prob:
            lines += _hex_dump(rng)
        events.append((t_kw, lines))

    for sec in range(spec.duration_s):
        faulty = not success and w_start <= sec < w_end
        rate = spec.events_per_second * (spec.fault_rate_factor if faulty else 1.0)
        pool = FAULT_POOL if faulty else SHARED_POOL
        # the stack logs something every second unless a fault silences it
        k = int(rng.poisson(rate)) if faulty else 1 + int(rng.poisson(max(rate - 1.0, 0.0)))
        for t_ms in np.sort(rng.integers(sec * 1000 + (1 if sec == 0 else 0), (sec + 1) * 1000, size=k)):
            layer, level, channel, tmpl = pool[int(rng.integers(len(pool)))]
            content = _fill(tmpl, rng, rnti)
            sub = int(rng.integers(0, 10240)) if channel else None
            events.append((int(t_ms), [record(int(t_ms), layer, level, content, sub, channel)]))

    events.sort(key=lambda e: e[0])
    return [ln for _, group in events for ln in group], duration


def generate_corpus(spec: CorpusSpec, out_dir: str | Path) -> list[tuple[str, int, int | None]]:
    """Write ``logs/*.log``, ``labels.csv`` and ``spec.echo`` under ``out_dir``.

    Returns the manifest rows ``(source_path, label, duration_s)`` with paths
    relative to ``out_dir``.
    """
    out = Path(out_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    root = np.random.SeedSequence(spec.seed)
    n_pass = int(round(spec.n_files * spec.pass_fraction))
    outcomes = np.zeros(spec.n_files, dtype=bool)
    outcomes[:n_pass] = True
    np.random.default_rng(root.spawn(1)[0]).shuffle(outcomes)

    rows = []
    for i, child in enumerate(root.spawn(spec.n_files)):
        rng = np.random.default_rng(child)
        lines, duration = generate_file(spec, bool(outcomes[i]), rng)
        rel = f"logs/run_{i:04d}.log"
        (out / rel).write_text("\n".join(lines) + "\n", encoding="utf-8")
        rows.append((rel, int(outcomes[i]), duration))

    with open(out / "labels.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["source_path", "label", "duration_s"])
        for rel, label, duration in rows:
            w.writerow([rel, label, "" if duration is None else duration])
    (out / "spec.echo").write_text(json.dumps(asdict(spec), indent=2, sort_keys=True) + "\n")
    return rows
