"""Text formats for symbols and group symbols.

Both formats are line based, whitespace separated and human-diffable; blank
lines and lines starting with ``#`` are ignored. Real numbers are written
with 17 significant digits so a write/read cycle reproduces every double
exactly. See ``docs/symbol_format.md`` for the grammar.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .group import GroupSymbol
from .manifold import enumerate_partition, parse_manifold
from .symbol import Symbol

__all__ = [
    "SymbolFileError",
    "FORMAT_VERSION",
    "fmt",
    "dumps_symbol",
    "loads_symbol",
    "write_symbol",
    "read_symbol",
    "dumps_group_symbol",
    "loads_group_symbol",
    "write_group_symbol",
    "read_group_symbol",
    "sniff",
]

FORMAT_VERSION = 1
SYMBOL_MAGIC = "specmult-symbol"
GROUP_MAGIC = "specmult-group-symbol"


class SymbolFileError(ValueError):
    """Malformed symbol file; the message names the line and field."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_lines(m: np.ndarray) -> list[str]:
    return [" ".join(f"{fmt(z.real)} {fmt(z.imag)}" for z in row) for row in m]


def dumps_symbol(sigma: Symbol) -> str:
    p = sigma.partition
    out = [
        f"{SYMBOL_MAGIC} {FORMAT_VERSION}",
        f"manifold {p.manifold.name}",
        f"n {p.dim_n}",
        f"nu {p.order_nu}",
        f"cutoff {fmt(p.cutoff)}",
        f"levels {len(p)}",
    ]
    for i, (lv, block) in enumerate(zip(p.levels, sigma.blocks)):
        out.append(f"level {i} lambda {fmt(lv.lam)} dim {lv.dim}")
        out.extend(_matrix_lines(block))
    return "\n".join(out) + "\n"


def dumps_group_symbol(tau: GroupSymbol) -> str:
    out = [f"{GROUP_MAGIC} {FORMAT_VERSION}", "manifold su2", f"reps {len(tau.reps)}"]
    for k in tau.reps:
        out.append(f"rep {k} dim {k + 1}")
        out.extend(_matrix_lines(tau[k]))
    return "\n".join(out) + "\n"


class _Reader:
    def __init__(self, text: str, source: str):
        self.source = source
        self.lines = [
            (i + 1, ln.split())
            for i, ln in enumerate(text.splitlines())
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
        self.pos = 0

    def fail(self, lineno, msg: str):
        where = f"{self.source}:{lineno}" if lineno is not None else self.source
        raise SymbolFileError(f"{where}: {msg}")

    def next(self, what: str):
        if self.pos >= len(self.lines):
            self.fail(None, f"unexpected end of file, expected {what}")
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def keyed(self, key: str, conv=str):
        lineno, toks = self.next(f"'{key}'")
        if len(toks) != 2 or toks[0] != key:
            self.fail(lineno, f"expected '{key} <value>', got {' '.join(toks)!r}")
        return lineno, self.convert(lineno, key, toks[1], conv)

    def convert(self, lineno, field: str, tok: str, conv):
        try:
            val = conv(tok)
        except ValueError:
            self.fail(lineno, f"field '{field}': cannot parse {tok!r}")
        if isinstance(val, float) and not math.isfinite(val):
            self.fail(lineno, f"field '{field}': value must be finite, got {tok!r}")
        return val

    def header(self, magic: str):
        lineno, toks = self.next("header")
        if len(toks) != 2 or toks[0] != magic:
            self.fail(lineno, f"expected header '{magic} {FORMAT_VERSION}'")
        version = self.convert(lineno, "format_version", toks[1], int)
        if version != FORMAT_VERSION:
            self.fail(lineno, f"unsupported format_version {version} (this reader handles {FORMAT_VERSION})")

    def matrix(self, d: int, label: str) -> np.ndarray:
        m = np.empty((d, d), dtype=complex)
        for r in range(d):
            lineno, toks = self.next(f"row {r + 1} of {label}")
            if len(toks) != 2 * d:
                self.fail(lineno, f"{label} row {r + 1}: expected {2 * d} numbers (re im pairs), got {len(toks)}")
            vals = [self.convert(lineno, f"{label} row {r + 1}", t, float) for t in toks]
            m[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
        return m

    def done(self):
        if self.pos < len(self.lines):
            lineno, toks = self.lines[self.pos]
            self.fail(lineno, f"trailing content {' '.join(toks)!r}")


def loads_symbol(text: str, source: str = "<symbol>") -> Symbol:
    rd = _Reader(text, source)
    rd.header(SYMBOL_MAGIC)
    ln, man_name = rd.keyed("manifold")
    try:
        man = parse_manifold(man_name)
    except ValueError as exc:
        rd.fail(ln, str(exc))
    ln, n = rd.keyed("n", int)
    if n != man.dim:
        rd.fail(ln, f"field 'n': {man.name} has dimension {man.dim}, file says {n}")
    ln, nu = rd.keyed("nu", int)
    if nu != 2:
        rd.fail(ln, f"field 'nu': only order 2 is supported, got {nu}")
    ln, cutoff = rd.keyed("cutoff", float)
    try:
        part = enumerate_partition(man, cutoff)
    except ValueError as exc:
        rd.fail(ln, str(exc))
    ln, nlev = rd.keyed("levels", int)
    if nlev != len(part):
        rd.fail(ln, f"field 'levels': cutoff {fmt(cutoff)} on {man.name} gives {len(part)} levels, file says {nlev}")
    blocks = []
    prev = -math.inf
    for i, lv in enumerate(part.levels):
        ln, toks = rd.next(f"level record {i}")
        if len(toks) != 6 or toks[0] != "level" or toks[2] != "lambda" or toks[4] != "dim":
            rd.fail(ln, f"expected 'level {i} lambda <x> dim <d>', got {' '.join(toks)!r}")
        idx = rd.convert(ln, "level_index", toks[1], int)
        lam = rd.convert(ln, "lambda", toks[3], float)
        dim = rd.convert(ln, "dim", toks[5], int)
        if idx != i:
            rd.fail(ln, f"field 'level_index': expected {i}, got {idx}")
        if not lam > prev:
            rd.fail(ln, f"field 'lambda': eigenvalues must increase strictly ({fmt(lam)} after {fmt(prev)})")
        if abs(lam - lv.lam) > 1e-12 * max(1.0, lv.lam):
            rd.fail(ln, f"field 'lambda': level {i} of {man.name} has lambda {fmt(lv.lam)}, file says {fmt(lam)}")
        if dim != lv.dim:
            rd.fail(ln, f"field 'dim': level {i} has dimension {lv.dim}, file says {dim}")
        prev = lam
        blocks.append(rd.matrix(dim, f"level {i}"))
    rd.done()
    return Symbol(part, tuple(blocks))


def loads_group_symbol(text: str, source: str = "<group symbol>") -> GroupSymbol:
    rd = _Reader(text, source)
    rd.header(GROUP_MAGIC)
    ln, man_name = rd.keyed("manifold")
    if man_name != "su2":
        rd.fail(ln, f"group symbols are defined on su2, got {man_name!r}")
    ln, nrep = rd.keyed("reps", int)
    if nrep < 1:
        rd.fail(ln, "field 'reps': need at least one representation")
    mats = {}
    for i in range(nrep):
        ln, toks = rd.next(f"rep record {i}")
        if len(toks) != 4 or toks[0] != "rep" or toks[2] != "dim":
            rd.fail(ln, f"expected 'rep <2l> dim <d>', got {' '.join(toks)!r}")
        k = rd.convert(ln, "rep", toks[1], int)
        d = rd.convert(ln, "dim", toks[3], int)
        if k != i:
            rd.fail(ln, f"field 'rep': reps must be listed as 2l = 0, 1, 2, ...; expected {i}, got {k}")
        if d != k + 1:
            rd.fail(ln, f"field 'dim': rep 2l={k} has dimension {k + 1}, file says {d}")
        mats[k] = rd.matrix(d, f"rep {k}")
    rd.done()
    return GroupSymbol(mats)


def write_symbol(sigma: Symbol, path) -> None:
    Path(path).write_text(dumps_symbol(sigma))


def read_symbol(path) -> Symbol:
    return loads_symbol(Path(path).read_text(), str(path))


def write_group_symbol(tau: GroupSymbol, path) -> None:
    Path(path).write_text(dumps_group_symbol(tau))


def read_group_symbol(path) -> GroupSymbol:
    return loads_group_symbol(Path(path).read_text(), str(path))


def sniff(path) -> str:
    """``"symbol"`` or ``"group"`` from the header line."""
    with open(path) as fh:
        for line in fh:
            toks = line.split()
            if not toks or toks[0].startswith("#"):
                continue
            if toks[0] == SYMBOL_MAGIC:
                return "symbol"
            if toks[0] == GROUP_MAGIC:
                return "group"
            break
    raise SymbolFileError(f"{path}: unrecognized file header")
