"""Tiny text grammar for shapes and functions used on the command line.

Shapes::

    interval:a=-1,b=1
    ball:n=2,r=1,c=0,0
    box:lo=0,0;hi=1,2
    boxunion:lo=0,0;hi=1,1|lo=1,0;hi=2,1     (items may carry a box: prefix)

Functions::

    tent:n=1            pyramid:n=2          bump:n=2,r=1
    cutoff:shape=<shape>,eps=0.1
    file:PATH           (grid file, see fracap.besov.read_grid)

Every function accepts an optional trailing ``h=<spacing>``.
"""

from __future__ import annotations

import re

from .besov import SampledFunction, bump, build_cutoff, pyramid, read_grid, tent
from .errors import DslParseError, FracapError
from .geometry import Ball, Box, BoxUnion, Interval, Shape

_NUM = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _split_kind(text: str) -> tuple[str, str, int]:
    if ":" not in text:
        raise DslParseError("expected '<kind>:<parameters>'", text, len(text))
    kind, _, rest = text.partition(":")
    return kind.strip().lower(), rest, len(kind) + 1


def _params(text: str, body: str, offset: int, allowed: dict) -> dict:
    """Parse ``k=v`` items separated by ',' or ';'; bare items extend the last key.

    ``allowed`` maps key -> arity ("1" scalar or "*" vector).
    """
    out: dict[str, list] = {}
    key = None
    pos = offset
    cursor = 0
    for tok in re.split(r"[,;]", body):
        at = offset + cursor
        cursor += len(tok) + 1
        if not tok.strip():
            raise DslParseError("empty item", text, at)
        if "=" in tok:
            k, _, v = tok.partition("=")
            k = k.strip().lower()
            if k not in allowed:
                raise DslParseError(f"unknown key {k!r} (expected one of {sorted(allowed)})",
                                    text, at)
            if k in out:
                raise DslParseError(f"duplicate key {k!r}", text, at)
            key = k
            out[k] = []
            v_at = at + len(tok.partition("=")[0]) + 1
        else:
            if key is None or allowed[key] != "*":
                raise DslParseError(f"unexpected value {tok.strip()!r}", text, at)
            v, v_at = tok, at
        v = v.strip()
        if not _NUM.match(v):
            raise DslParseError(f"expected a number, got {v!r}", text, v_at)
        out[key].append(float(v))
        pos = at + len(tok)
    for k, arity in allowed.items():
        if k in out and arity == "1" and len(out[k]) != 1:
            raise DslParseError(f"key {k!r} takes a single number", text, pos)
    return out


def _need(text, got: dict, keys, pos):
    for k in keys:
        if k not in got:
            raise DslParseError(f"missing key {k!r}", text, pos)


def _box(text: str, body: str, offset: int) -> Box:
    p = _params(text, body, offset, {"lo": "*", "hi": "*"})
    _need(text, p, ("lo", "hi"), offset + len(body))
    if len(p["lo"]) != len(p["hi"]):
        raise DslParseError("lo and hi must have the same length", text, offset)
    try:
        return Box(tuple(p["lo"]), tuple(p["hi"]))
    except FracapError as exc:
        raise DslParseError(str(exc), text, offset) from None


def parse_shape(text: str, _offset: int = 0, _full: str | None = None) -> Shape:
    full = text if _full is None else _full
    kind, body, start = _split_kind(text)
    off = _offset + start
    try:
        if kind == "interval":
            p = _params(full, body, off, {"a": "1", "b": "1"})
            _need(full, p, ("a", "b"), off + len(body))
            return Interval(p["a"][0], p["b"][0])
        if kind == "ball":
            p = _params(full, body, off, {"n": "1", "r": "1", "c": "*"})
            _need(full, p, ("r",), off + len(body))
            n = int(p["n"][0]) if "n" in p else len(p.get("c", [0.0]))
            if "n" in p and p["n"][0] != n:
                raise DslParseError("n must be an integer", full, off)
            c = tuple(p.get("c", [0.0] * n))
            if len(c) != n:
                raise DslParseError(f"center has {len(c)} components, n={n}", full, off)
            return Ball(c, p["r"][0])
        if kind == "box":
            return _box(full, body, off)
        if kind == "boxunion":
            boxes = []
            pos = off
            for item in body.split("|"):
                sub = item
                sub_off = pos
                if sub.strip().lower().startswith("box:"):
                    cut = sub.index(":") + 1
                    sub, sub_off = sub[cut:], pos + cut
                boxes.append(_box(full, sub, sub_off))
                pos += len(item) + 1
            return BoxUnion(tuple(boxes))
    except DslParseError:
        raise
    except FracapError as exc:
        raise DslParseError(str(exc), full, off) from None
    raise DslParseError(f"unknown shape kind {kind!r}", full, _offset)


def _tail_spacing(text: str, body: str, off: int) -> tuple[str, float | None]:
    m = re.search(r"(^|,)\s*h=([^,]*)$", body)
    if not m:
        return body, None
    v = m.group(2).strip()
    if not _NUM.match(v) or float(v) <= 0:
        raise DslParseError(f"h must be a positive number, got {v!r}", text, off + m.start(2))
    return body[:m.start()], float(v)


def parse_function(text: str) -> SampledFunction:
    kind, body, off = _split_kind(text)
    if kind == "file":
        try:
            return read_grid(body)
        except OSError as exc:
            raise DslParseError(f"cannot read grid file: {exc.strerror}", text, off) from None
        except (FracapError, ValueError) as exc:
            raise DslParseError(f"bad grid file: {exc}", text, off) from None
    body, h = _tail_spacing(text, body, off)
    try:
        if kind in ("tent", "pyramid", "bump"):
            keys = {"n": "1", "r": "1"} if kind == "bump" else {"n": "1"}
            p = _params(text, body, off, keys)
            n = int(p.get("n", [1.0 if kind == "tent" else 2.0])[0])
            if kind == "tent":
                return tent(n, h)
            if kind == "pyramid":
                return pyramid(n, h)
            return bump(n, p.get("r", [1.0])[0], h)
        if kind == "cutoff":
            m = re.search(r"(^|,)\s*eps=([^,]*)$", body)
            if not m:
                raise DslParseError("cutoff needs a trailing eps=<value>", text, off + len(body))
            v = m.group(2).strip()
            if not _NUM.match(v):
                raise DslParseError(f"expected a number, got {v!r}", text, off + m.start(2))
            head = body[:m.start()]
            if not head.strip().lower().startswith("shape="):
                raise DslParseError("cutoff needs shape=<shape> first", text, off)
            s_off = off + head.index("=") + 1
            shape = parse_shape(head[head.index("=") + 1:], s_off, text)
            return build_cutoff(shape, float(v), h)
    except DslParseError:
        raise
    except FracapError as exc:
        raise DslParseError(str(exc), text, off) from None
    raise DslParseError(f"unknown function kind {kind!r}", text, 0)
