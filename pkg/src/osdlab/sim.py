"""Monte Carlo BER/FER experiments.

Codewords are simulated in fixed-size blocks.  Block ``b`` draws its messages,
fading and noise from a generator seeded with ``(seed, b)``, so every decoder
and every SNR point sees the same underlying random numbers, and a block's
result does not depend on which process computed it.  Per-decoder totals are
accumulated in block order and the stop rule is checked after each block,
which makes the output independent of the worker count.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import CHANNEL_MODELS, ChannelConfig, modulate, transmit_batch
from .codes import Code, load_code
from .decoders import DecoderSpec, InfeasibleDecoderError, make_decoder, parse_decoder
from .gf2 import encode_many

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "decoder",
    "snr_db",
    "bits_sent",
    "bit_errors",
    "ber",
    "codewords_sent",
    "word_errors",
    "fer",
    "patterns_tested_avg",
    "wall_seconds",
)
CHECKSUM_COLUMN = "noise_checksum"


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    code: str
    channel: str
    snr_db: tuple[float, ...]
    decoders: tuple[tuple[str, str], ...]  # (label, grammar)
    seed: int = 0
    max_codewords: int = 100_000
    min_bit_errors: int = 100
    workers: int = 1
    block_size: int = 1000
    checksum: bool = False

    def __post_init__(self):
        if self.channel not in CHANNEL_MODELS:
            raise ConfigError(f"unknown channel {self.channel!r}; choose from {CHANNEL_MODELS}")
        if not self.snr_db:
            raise ConfigError("empty SNR list")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("SNR list must be strictly increasing")
        if not self.decoders:
            raise ConfigError("no decoders configured")
        labels = [lab for lab, _ in self.decoders]
        if len(set(labels)) != len(labels):
            raise ConfigError("duplicate decoder labels")
        if self.max_codewords < 0 or self.min_bit_errors < 0:
            raise ConfigError("stop limits must be non-negative")
        if self.workers < 1 or self.block_size < 1:
            raise ConfigError("workers and block_size must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**data)

    def load_code(self) -> Code:
        try:
            return load_code(self.code)
        except (KeyError, OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def decoder_specs(self, code: Code) -> list[DecoderSpec]:
        out = []
        for label, text in self.decoders:
            try:
                spec = parse_decoder(text, code.k, code.dmin)
            except ValueError as exc:
                raise ConfigError(f"decoder {label!r}: {exc}") from exc
            out.append(DecoderSpec(spec.family, spec.segments, spec.skipping, label))
        return out


@dataclass
class ResultRow:
    decoder: str
    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    codewords_sent: int
    word_errors: int
    fer: float
    patterns_tested_avg: float
    wall_seconds: float
    noise_checksum: str | None = None

    def key(self) -> tuple:
        """Everything except timing, for reproducibility comparisons."""
        d = asdict(self)
        d.pop("wall_seconds")
        return tuple(d.values())


# --------------------------------------------------------------------------
# config files


def _parse_snr(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0:
            raise ConfigError(f"SNR range must be start:step:stop, got {text!r}")
        start, step, stop = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(x) for x in text.replace(",", " ").split())


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """Parse the INI-style experiment format (see README)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    if "experiment" not in cp:
        raise ConfigError(f"{source}: missing [experiment] section")
    ex = cp["experiment"]
    allowed = {"code", "channel", "snr_db", "seed", "max_codewords", "min_bit_errors", "workers",
               "block_size", "checksum"}
    unknown = set(ex) - allowed
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    decoders = []
    for name in cp.sections():
        if name == "experiment":
            continue
        if not name.startswith("decoder."):
            raise ConfigError(f"{source}: unexpected section [{name}]")
        sec = cp[name]
        if "spec" not in sec:
            raise ConfigError(f"{source}: [{name}] needs a spec line")
        decoders.append((name[len("decoder.") :], sec["spec"].strip()))
    try:
        return ExperimentConfig(
            code=ex["code"].strip(),
            channel=ex.get("channel", "awgn").strip(),
            snr_db=_parse_snr(ex["snr_db"]),
            decoders=tuple(decoders),
            seed=ex.getint("seed", 0),
            max_codewords=ex.getint("max_codewords", 100_000),
            min_bit_errors=ex.getint("min_bit_errors", 100),
            workers=ex.getint("workers", 1),
            block_size=ex.getint("block_size", 1000),
            checksum=ex.getboolean("checksum", False),
        )
    except KeyError as exc:
        raise ConfigError(f"{source}: missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (``fig2.cfg`` ... ``fig6.cfg``)."""
    p = Path(__file__).with_name("configs") / name
    if not p.exists():
        raise ConfigError(f"no bundled config {name!r}")
    return p


# --------------------------------------------------------------------------
# block simulation


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))


def simulate_block(code: Code, channel: ChannelConfig, decoders: dict, seed: int, block: int, size: int):
    """Run one block through every decoder in ``decoders``.

    Returns ``{label: (bit_errors, word_errors, patterns, seconds)}`` and the
    CRC32 of the reliabilities.
    """
    rng = block_rng(seed, block)
    k = code.k
    U = rng.integers(0, 2, size=(size, k), dtype=np.uint8)
    C = encode_many(U, code.G)
    _, _, r = transmit_batch(modulate(C), channel, rng)
    out = {}
    for label, dec in decoders.items():
        t0 = time.perf_counter()
        res = dec.decode_batch(r)
        dt = time.perf_counter() - t0
        wrong = res.codewords != C
        out[label] = (
            int(wrong[:, :k].sum()),
            int(wrong.any(axis=1).sum()),
            int(res.patterns_tested.sum()),
            dt,
        )
    return out, zlib.crc32(np.ascontiguousarray(r).tobytes())


_worker_state: dict = {}


def _worker_init(code_name: str, specs: list[DecoderSpec]):
    code = load_code(code_name)
    _worker_state["code"] = code
    _worker_state["decoders"] = {s.label: make_decoder(code.G, s) for s in specs}


def _worker_block(channel: ChannelConfig, labels: tuple[str, ...], seed: int, block: int, size: int):
    decs = {lab: _worker_state["decoders"][lab] for lab in labels}
    return simulate_block(_worker_state["code"], channel, decs, seed, block, size)


@dataclass
class _Cell:
    words: int = 0
    bit_errors: int = 0
    word_errors: int = 0
    patterns: int = 0
    seconds: float = 0.0
    crc: int = 0
    done: bool = False


def run(config: ExperimentConfig, progress=None) -> list[ResultRow]:
    """Simulate every (SNR, decoder) cell until its stop rule fires."""
    code = config.load_code()
    specs = config.decoder_specs(code)
    decoders = {s.label: make_decoder(code.G, s) for s in specs}  # may raise InfeasibleDecoderError
    rows: list[ResultRow] = []
    if config.max_codewords == 0:
        return rows

    pool = None
    if config.workers > 1:
        pool = ProcessPoolExecutor(config.workers, initializer=_worker_init, initargs=(config.code, specs))
    try:
        for snr in config.snr_db:
            channel = ChannelConfig(config.channel, snr, code.rate)
            cells = {s.label: _Cell() for s in specs}
            block = 0
            while not all(c.done for c in cells.values()):
                active = tuple(lab for lab, c in cells.items() if not c.done)
                wave = range(block, block + config.workers)
                sizes = [min(config.block_size, config.max_codewords - b * config.block_size) for b in wave]
                todo = [(b, n) for b, n in zip(wave, sizes) if n > 0]
                if pool is None:
                    results = [
                        simulate_block(code, channel, {a: decoders[a] for a in active}, config.seed, b, n)
                        for b, n in todo
                    ]
                else:
                    futs = [pool.submit(_worker_block, channel, active, config.seed, b, n) for b, n in todo]
                    results = [f.result() for f in futs]
                for (b, n), (stats, crc) in zip(todo, results):
                    for lab in active:
                        cell = cells[lab]
                        if cell.done:
                            continue
                        be, we, pt, dt = stats[lab]
                        cell.words += n
                        cell.bit_errors += be
                        cell.word_errors += we
                        cell.patterns += pt
                        cell.seconds += dt
                        cell.crc = zlib.crc32(crc.to_bytes(4, "little"), cell.crc)
                        if cell.words >= config.max_codewords or cell.bit_errors >= config.min_bit_errors:
                            cell.done = True
                block += config.workers
                if progress is not None:
                    progress(snr, cells)
            for s in specs:
                c = cells[s.label]
                bits = c.words * code.k
                rows.append(
                    ResultRow(
                        decoder=s.label,
                        snr_db=snr,
                        bits_sent=bits,
                        bit_errors=c.bit_errors,
                        ber=c.bit_errors / bits if bits else float("nan"),
                        codewords_sent=c.words,
                        word_errors=c.word_errors,
                        fer=c.word_errors / c.words if c.words else float("nan"),
                        patterns_tested_avg=c.patterns / c.words if c.words else float("nan"),
                        wall_seconds=round(c.seconds, 6),
                        noise_checksum=f"{c.crc:08x}" if config.checksum else None,
                    )
                )
            log.info("snr %.2f dB done", snr)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


# --------------------------------------------------------------------------
# output


def _columns(rows, checksum: bool | None) -> tuple[str, ...]:
    if checksum is None:
        checksum = any(r.noise_checksum is not None for r in rows)
    return RESULT_COLUMNS + ((CHECKSUM_COLUMN,) if checksum else ())


def to_csv(rows, checksum: bool | None = None) -> str:
    cols = _columns(rows, checksum)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        d = asdict(r)
        w.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in cols])
    return buf.getvalue()


def to_json(rows, checksum: bool | None = None) -> str:
    cols = _columns(rows, checksum)
    return json.dumps({"columns": list(cols), "rows": [[asdict(r)[c] for c in cols] for r in rows]}, indent=1)


def emit(rows, path=None, format: str = "csv", checksum: bool | None = None) -> str:
    """Serialise ``rows``; write to ``path`` if given.  Returns the text."""
    if format == "csv":
        text = to_csv(rows, checksum)
    elif format == "json":
        text = to_json(rows, checksum)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


_CASTS = {
    "decoder": str,
    "snr_db": float,
    "bits_sent": int,
    "bit_errors": int,
    "ber": float,
    "codewords_sent": int,
    "word_errors": int,
    "fer": float,
    "patterns_tested_avg": float,
    "wall_seconds": float,
    CHECKSUM_COLUMN: str,
}


def _row(d: dict) -> ResultRow:
    return ResultRow(**{k: _CASTS[k](v) for k, v in d.items()})


def parse_table(text: str, format: str = "csv") -> list[ResultRow]:
    if format == "json":
        data = json.loads(text)
        return [_row(dict(zip(data["columns"], vals))) for vals in data["rows"]]
    if format == "csv":
        return [_row(d) for d in csv.DictReader(io.StringIO(text))]
    raise ValueError(f"unknown format {format!r}")


def load_table(path, format: str | None = None) -> list[ResultRow]:
    path = Path(path)
    fmt = format or ("json" if path.suffix == ".json" else "csv")
    return parse_table(path.read_text(), fmt)


# --------------------------------------------------------------------------
# curve helpers


def snr_at_ber(rows, decoder: str, target: float) -> float:
    """SNR where ``decoder``'s BER crosses ``target``, by log-linear interpolation.

    Returns ``nan`` if the measured curve never brackets the target.
    """
    pts = sorted((r.snr_db, r.ber) for r in rows if r.decoder == decoder and r.bit_errors > 0)
    return interpolate_crossing([p[0] for p in pts], [p[1] for p in pts], target)


def interpolate_crossing(snr, ber, target: float) -> float:
    snr = np.asarray(snr, dtype=float)
    lb = np.log10(np.asarray(ber, dtype=float))
    t = math.log10(target)
    for i in range(len(snr) - 1):
        if (lb[i] - t) * (lb[i + 1] - t) <= 0 and lb[i] != lb[i + 1]:
            return float(snr[i] + (t - lb[i]) * (snr[i + 1] - snr[i]) / (lb[i + 1] - lb[i]))
    return float("nan")


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "InfeasibleDecoderError",
    "ResultRow",
    "RESULT_COLUMNS",
    "bundled_config",
    "emit",
    "load_config",
    "load_table",
    "parse_config",
    "parse_table",
    "run",
    "simulate_block",
    "snr_at_ber",
]
