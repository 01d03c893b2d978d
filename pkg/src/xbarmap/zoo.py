"""Transcribed reference networks, emitted as network-schema documents.

Classifier heads default to 10 classes (CIFAR-10). Squeezenet follows the
v1.0 layer table, MobilenetV3-small the published bneck table (SE blocks kept
as their two 1x1 convolutions, modelled as ``fc`` because they act on a
globally pooled vector), Resnet18 the standard basic-block layout.
"""

from __future__ import annotations

from typing import Any

from .netir import Network, infer_shapes, parse_network

# (in, squeeze, expand) per fire module, v1.0
SQUEEZENET_FIRES = [
    (96, 16, 64), (128, 16, 64), (128, 32, 128),
    (256, 32, 128), (256, 48, 192), (384, 48, 192), (384, 64, 256),
    (512, 64, 256),
]
# fire modules whose input passes through a 3x3/2 max-pool (ceil mode)
_SQUEEZENET_POOLED = {2, 5, 9}

# (kernel, expanded channels, out channels, SE, stride)
MOBILENETV3_SMALL_BNECK = [
    (3, 16, 16, True, 2),
    (3, 72, 24, False, 2),
    (3, 88, 24, False, 1),
    (5, 96, 40, True, 2),
    (5, 240, 40, True, 1),
    (5, 240, 40, True, 1),
    (5, 120, 48, True, 1),
    (5, 144, 48, True, 1),
    (5, 288, 96, True, 2),
    (5, 576, 96, True, 1),
    (5, 576, 96, True, 1),
]


def _make_divisible(v: float, divisor: int = 8) -> int:
    new_v = max(divisor, int(v + divisor / 2) // divisor * divisor)
    if new_v < 0.9 * v:
        new_v += divisor
    return new_v


def squeezenet_doc(num_classes: int = 10, input_size: int = 224) -> dict[str, Any]:
    pool = {"k": 3, "stride": 2, "ceil": True}
    layers: list[dict[str, Any]] = [
        {"name": "conv1", "kind": "conv", "k": 7, "c_in": 3, "c_out": 96, "stride": 2, "padding": 0},
    ]
    prev_outputs: list[str] = ["conv1"]
    for i, (c_in, s, e) in enumerate(SQUEEZENET_FIRES, start=2):
        sq = {"name": f"fire{i}.squeeze", "kind": "conv", "k": 1, "c_in": c_in, "c_out": s, "stride": 1, "padding": 0}
        if len(prev_outputs) > 1:
            sq["input"] = list(prev_outputs)
        if i in _SQUEEZENET_POOLED:
            sq["pool"] = pool
        layers.append(sq)
        layers.append({"name": f"fire{i}.expand1x1", "kind": "conv", "k": 1, "c_in": s, "c_out": e, "stride": 1, "padding": 0})
        layers.append({
            "name": f"fire{i}.expand3x3", "kind": "conv", "k": 3, "c_in": s, "c_out": e,
            "stride": 1, "padding": 1, "input": f"fire{i}.squeeze",
        })
        prev_outputs = [f"fire{i}.expand1x1", f"fire{i}.expand3x3"]
    layers.append({
        "name": "conv10", "kind": "conv", "k": 1, "c_in": 512, "c_out": num_classes,
        "stride": 1, "padding": 0, "input": prev_outputs,
    })
    return {"name": "squeezenet1_0", "input_shape": [3, input_size, input_size], "layers": layers}


def mobilenetv3_small_doc(num_classes: int = 10, input_size: int = 64, se: bool = True) -> dict[str, Any]:
    layers: list[dict[str, Any]] = [
        {"name": "stem", "kind": "conv", "k": 3, "c_in": 3, "c_out": 16, "stride": 2, "padding": 1},
    ]
    c = 16
    for b, (k, exp, out, use_se, stride) in enumerate(MOBILENETV3_SMALL_BNECK, start=1):
        p = f"b{b}"
        if exp != c:
            layers.append({"name": f"{p}.expand", "kind": "conv", "k": 1, "c_in": c, "c_out": exp, "stride": 1, "padding": 0})
        layers.append({"name": f"{p}.dw", "kind": "dwconv", "k": k, "c_in": exp, "stride": stride, "padding": k // 2})
        if se and use_se:
            sq = _make_divisible(exp // 4)
            layers.append({"name": f"{p}.se_reduce", "kind": "fc", "c_in": exp, "c_out": sq})
            layers.append({"name": f"{p}.se_expand", "kind": "fc", "c_in": sq, "c_out": exp})
        proj = {"name": f"{p}.project", "kind": "conv", "k": 1, "c_in": exp, "c_out": out, "stride": 1, "padding": 0}
        if se and use_se:
            proj["input"] = f"{p}.dw"
        layers.append(proj)
        c = out
    layers += [
        {"name": "head.conv", "kind": "conv", "k": 1, "c_in": 96, "c_out": 576, "stride": 1, "padding": 0},
        {"name": "head.fc1", "kind": "fc", "c_in": 576, "c_out": 1024, "pool": "global"},
        {"name": "head.fc2", "kind": "fc", "c_in": 1024, "c_out": num_classes},
    ]
    return {"name": "mobilenetv3_small", "input_shape": [3, input_size, input_size], "layers": layers}


def resnet18_doc(num_classes: int = 10, input_size: int = 224) -> dict[str, Any]:
    layers: list[dict[str, Any]] = [
        {"name": "conv1", "kind": "conv", "k": 7, "c_in": 3, "c_out": 64, "stride": 2, "padding": 3},
    ]
    block_out = "conv1"
    c = 64
    first = True
    for stage, (width, stride) in enumerate([(64, 1), (128, 2), (256, 2), (512, 2)], start=1):
        for blk in range(2):
            s = stride if blk == 0 else 1
            p = f"layer{stage}.{blk}"
            c1 = {"name": f"{p}.conv1", "kind": "conv", "k": 3, "c_in": c, "c_out": width,
                  "stride": s, "padding": 1, "input": block_out}
            if first:
                c1["pool"] = {"k": 3, "stride": 2, "padding": 1}
                first = False
            layers.append(c1)
            layers.append({"name": f"{p}.conv2", "kind": "conv", "k": 3, "c_in": width, "c_out": width, "stride": 1, "padding": 1})
            if s != 1 or c != width:
                layers.append({"name": f"{p}.downsample", "kind": "conv", "k": 1, "c_in": c, "c_out": width,
                               "stride": s, "padding": 0, "input": block_out})
            block_out = f"{p}.conv2"
            c = width
    layers.append({"name": "fc", "kind": "fc", "c_in": 512, "c_out": num_classes, "input": block_out, "pool": "global"})
    return {"name": "resnet18", "input_shape": [3, input_size, input_size], "layers": layers}


def squeezenet(**kw) -> Network:
    return infer_shapes(parse_network(squeezenet_doc(**kw)))


def mobilenetv3_small(**kw) -> Network:
    return infer_shapes(parse_network(mobilenetv3_small_doc(**kw)))


def resnet18(**kw) -> Network:
    return infer_shapes(parse_network(resnet18_doc(**kw)))


MODELS = {
    "squeezenet": squeezenet_doc,
    "mobilenetv3_small": mobilenetv3_small_doc,
    "resnet18": resnet18_doc,
}
