"""Network intermediate representation.

A network is an ordered chain of weight-bearing layers (``conv``, ``dwconv``,
``fc``). Branching topologies are linearized: a layer may name the layer(s)
whose output it consumes through ``input`` (a list is a channel concat), and
pooling that sits between two weight layers is attached to the consumer as
``pool``. Neither affects crossbar area or cycle counts; both only matter for
shape inference.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import yaml

KINDS = ("conv", "dwconv", "fc")


class NetworkError(ValueError):
    """Base class for malformed network or hardware descriptions."""


class ParseError(NetworkError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ShapeError(NetworkError):
    pass


@dataclass(frozen=True)
class Pool:
    """Pooling applied to a layer's input before the layer runs."""

    k: int = 2
    stride: int | None = None
    padding: int = 0
    ceil_mode: bool = False
    global_pool: bool = False

    def apply(self, h: int, w: int) -> tuple[int, int]:
        if self.global_pool:
            return 1, 1
        stride = self.stride or self.k
        rnd = math.ceil if self.ceil_mode else math.floor
        out_h = rnd((h + 2 * self.padding - self.k) / stride) + 1
        out_w = rnd((w + 2 * self.padding - self.k) / stride) + 1
        return out_h, out_w

    def to_dict(self) -> Any:
        if self.global_pool:
            return "global"
        d: dict[str, Any] = {"k": self.k}
        if self.stride is not None:
            d["stride"] = self.stride
        if self.padding:
            d["padding"] = self.padding
        if self.ceil_mode:
            d["ceil"] = True
        return d


@dataclass(frozen=True)
class Layer:
    name: str
    kind: str
    k_h: int
    k_w: int
    c_in: int
    c_out: int
    stride: int = 1
    padding: int = 0
    h_out: int | None = None
    w_out: int | None = None
    inputs: tuple[str, ...] = ()
    pool: Pool | None = None

    @property
    def has_shape(self) -> bool:
        return self.h_out is not None and self.w_out is not None

    @property
    def params(self) -> int:
        h, w = layer_matrix_dims(self)
        return h * w

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind != "fc":
            if self.k_h == self.k_w:
                d["k"] = self.k_h
            else:
                d["k_h"], d["k_w"] = self.k_h, self.k_w
        d["c_in"] = self.c_in
        d["c_out"] = self.c_out
        if self.kind != "fc":
            d["stride"] = self.stride
            d["padding"] = self.padding
        if self.inputs:
            d["input"] = list(self.inputs) if len(self.inputs) > 1 else self.inputs[0]
        if self.pool is not None:
            d["pool"] = self.pool.to_dict()
        return d


@dataclass(frozen=True)
class Network:
    layers: tuple[Layer, ...]
    input_shape: tuple[int, int, int]
    name: str = "network"

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def shaped(self) -> bool:
        return all(layer.has_shape for layer in self.layers)

    @property
    def params(self) -> int:
        return sum(layer.params for layer in self.layers)

    def index(self, name: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.name == name:
                return i
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "input_shape": list(self.input_shape),
            "layers": [layer.to_dict() for layer in self.layers],
        }

    def digest(self) -> str:
        return document_digest(self.to_dict())


@dataclass(frozen=True)
class HWConfig:
    """Crossbar geometry and budget. ``num_xbars == 0`` means unbounded."""

    xbar_rows: int = 128
    xbar_cols: int = 128
    num_xbars: int = 0
    s_dw: int = 1

    def __post_init__(self):
        for name in ("xbar_rows", "xbar_cols", "s_dw"):
            if getattr(self, name) < 1:
                raise ParseError("must be >= 1", name)
        if self.num_xbars < 0:
            raise ParseError("must be >= 0", "num_xbars")

    @property
    def xbar_area(self) -> int:
        return self.xbar_rows * self.xbar_cols

    @property
    def bounded(self) -> bool:
        return self.num_xbars > 0

    @property
    def capacity(self) -> int | None:
        """Total cells across the budget, or None when unbounded."""
        return self.num_xbars * self.xbar_area if self.bounded else None

    def with_budget(self, num_xbars: int) -> "HWConfig":
        return replace(self, num_xbars=num_xbars)

    def to_dict(self) -> dict[str, int]:
        return {
            "xbar_rows": self.xbar_rows,
            "xbar_cols": self.xbar_cols,
            "num_xbars": self.num_xbars,
            "s_dw": self.s_dw,
        }


def document_digest(doc: Any) -> str:
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def load_document(source: str | Path | Mapping[str, Any]) -> Any:
    """Load a JSON/YAML document from a path, a string, or pass a mapping through."""
    if isinstance(source, Mapping):
        return source
    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and Path(source).suffix in (".json", ".yaml", ".yml")
    ):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed document ({exc})") from None


def _positive_int(value: Any, fieldname: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", fieldname)
    if value < minimum:
        raise ParseError(f"must be ≥ {minimum}", fieldname)
    return value


def _parse_pool(raw: Any, where: str) -> Pool | None:
    if raw is None:
        return None
    if raw == "global":
        return Pool(global_pool=True)
    if not isinstance(raw, Mapping):
        raise ParseError("expected a mapping or 'global'", f"{where}.pool")
    k = _positive_int(raw.get("k", 2), f"{where}.pool.k")
    stride = raw.get("stride")
    if stride is not None:
        stride = _positive_int(stride, f"{where}.pool.stride")
    padding = _positive_int(raw.get("padding", 0), f"{where}.pool.padding", minimum=0)
    return Pool(k=k, stride=stride, padding=padding, ceil_mode=bool(raw.get("ceil", False)))


def _parse_layer(raw: Any, idx: int) -> Layer:
    where = f"layers[{idx}]"
    if not isinstance(raw, Mapping):
        raise ParseError("expected a mapping", where)
    kind = raw.get("kind")
    if kind not in KINDS:
        raise ParseError(f"unknown layer kind {kind!r} (expected one of {', '.join(KINDS)})", f"{where}.kind")
    name = str(raw.get("name", f"{kind}{idx}"))

    if kind == "fc":
        c_in = _positive_int(raw.get("c_in", raw.get("in")), f"{where}.c_in")
        c_out = _positive_int(raw.get("c_out", raw.get("out")), f"{where}.c_out")
        k_h = k_w = stride = 1
        padding = 0
    else:
        k = raw.get("k")
        k_h = _positive_int(raw.get("k_h", k), f"{where}.k_h")
        k_w = _positive_int(raw.get("k_w", k), f"{where}.k_w")
        c_in = _positive_int(raw.get("c_in"), f"{where}.c_in")
        if kind == "dwconv":
            c_out = _positive_int(raw.get("c_out", c_in), f"{where}.c_out")
            if c_out != c_in:
                raise ParseError("depthwise layers need c_out == c_in", f"{where}.c_out")
        else:
            c_out = _positive_int(raw.get("c_out"), f"{where}.c_out")
        stride = _positive_int(raw.get("stride", 1), f"{where}.stride")
        padding = _positive_int(raw.get("padding", 0), f"{where}.padding", minimum=0)

    src = raw.get("input", ())
    inputs = (src,) if isinstance(src, str) else tuple(str(s) for s in src)
    return Layer(
        name=name, kind=kind, k_h=k_h, k_w=k_w, c_in=c_in, c_out=c_out,
        stride=stride, padding=padding, inputs=inputs,
        pool=_parse_pool(raw.get("pool"), where),
    )


def parse_network(text: str | Path | Mapping[str, Any]) -> Network:
    """Parse a network document. Shapes are left unset; see :func:`infer_shapes`."""
    doc = load_document(text)
    if not isinstance(doc, Mapping):
        raise ParseError("network document must be a mapping")
    shape = doc.get("input_shape")
    if not isinstance(shape, Sequence) or len(shape) != 3:
        raise ParseError("expected [C, H, W]", "input_shape")
    input_shape = tuple(_positive_int(v, f"input_shape[{i}]") for i, v in enumerate(shape))
    raw_layers = doc.get("layers")
    if not isinstance(raw_layers, Sequence) or isinstance(raw_layers, str) or not raw_layers:
        raise ParseError("expected a non-empty list", "layers")
    layers = tuple(_parse_layer(raw, i) for i, raw in enumerate(raw_layers))
    names = [layer.name for layer in layers]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ParseError(f"duplicate layer name {dup!r}", "layers")
    for i, layer in enumerate(layers):
        for src in layer.inputs:
            if src not in names[:i]:
                raise ParseError(f"unknown or forward input {src!r}", f"layers[{i}].input")
    return Network(layers=layers, input_shape=input_shape, name=str(doc.get("name", "network")))


def parse_hw(text: str | Path | Mapping[str, Any]) -> HWConfig:
    doc = load_document(text)
    if not isinstance(doc, Mapping):
        raise ParseError("hardware document must be a mapping")
    unknown = set(doc) - {"xbar_rows", "xbar_cols", "num_xbars", "s_dw"}
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)}", "hw")
    return HWConfig(
        xbar_rows=_positive_int(doc.get("xbar_rows", 128), "xbar_rows"),
        xbar_cols=_positive_int(doc.get("xbar_cols", 128), "xbar_cols"),
        num_xbars=_positive_int(doc.get("num_xbars", 0), "num_xbars", minimum=0),
        s_dw=_positive_int(doc.get("s_dw", 1), "s_dw"),
    )


def conv_out(size: int, k: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - k) // stride + 1


def infer_shapes(net: Network, input_shape: Iterable[int] | None = None) -> Network:
    """Fill ``h_out``/``w_out`` on every layer by forward propagation.

    Channel counts are checked against whatever each layer consumes (the
    previous layer in chain order unless ``input`` says otherwise).
    """
    c0, h0, w0 = tuple(input_shape) if input_shape is not None else net.input_shape
    outputs: dict[str, tuple[int, int, int]] = {}
    prev = (c0, h0, w0)
    shaped = []
    for i, layer in enumerate(net.layers):
        if layer.inputs:
            srcs = [outputs[s] for s in layer.inputs]
            spatial = {(h, w) for _, h, w in srcs}
            if len(spatial) != 1:
                raise ShapeError(f"{layer.name}: concatenated inputs disagree on spatial size {sorted(spatial)}")
            c = sum(s[0] for s in srcs)
            h, w = srcs[0][1], srcs[0][2]
        else:
            c, h, w = prev
        if layer.pool is not None:
            h, w = layer.pool.apply(h, w)
            if h < 1 or w < 1:
                raise ShapeError(f"{layer.name}: pooling yields non-positive size {h}x{w}")

        if layer.kind == "fc":
            if layer.c_in not in (c, c * h * w):
                raise ShapeError(f"{layer.name}: c_in={layer.c_in} but input provides {c} channels ({c}x{h}x{w})")
            h_out = w_out = 1
        else:
            if layer.c_in != c:
                raise ShapeError(f"{layer.name}: c_in={layer.c_in} but input provides {c} channels")
            h_out = conv_out(h, layer.k_h, layer.stride, layer.padding)
            w_out = conv_out(w, layer.k_w, layer.stride, layer.padding)
            if h_out < 1 or w_out < 1:
                raise ShapeError(f"{layer.name}: non-positive output size {h_out}x{w_out}")
        done = replace(layer, h_out=h_out, w_out=w_out)
        shaped.append(done)
        prev = (layer.c_out, h_out, w_out)
        outputs[layer.name] = prev
    return Network(layers=tuple(shaped), input_shape=(c0, h0, w0), name=net.name)


def layer_matrix_dims(layer: Layer) -> tuple[int, int]:
    """(rows, cols) of the flattened weight matrix, one weight per cell."""
    if layer.kind == "dwconv":
        return layer.k_w * layer.k_h, layer.c_in
    return layer.k_w * layer.k_h * layer.c_in, layer.c_out


def layer_cycles(layer: Layer, s_dw: int = 1) -> int:
    """Per-sample activation cycles; depthwise work is divided across ``s_dw`` slices."""
    if not layer.has_shape:
        raise ShapeError(f"{layer.name}: shapes not inferred")
    if layer.kind == "fc":
        return 1
    pixels = layer.h_out * layer.w_out
    if layer.kind == "conv":
        return pixels
    if s_dw < 1 or s_dw > layer.c_in:
        raise ValueError(f"{layer.name}: s_dw={s_dw} must lie in [1, c_in={layer.c_in}]")
    return math.ceil(pixels * layer.c_in / s_dw)
