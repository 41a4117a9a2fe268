#!/usr/bin/env python3
"""Regenerate the shipped architecture configs under configs/."""
import json
import pathlib
import sys


class Net:
    def __init__(self, name):
        self.name = name
        self.layers = []
        self.taps = []
        self.channels = 3

    def add(self, name, op, **params):
        entry = {"name": name, "op": op}
        if params:
            entry["params"] = params
        self.layers.append(entry)
        return name

    def conv(self, name, cout, k, stride=1, pad=0, src=None):
        params = {"kernel": k, "stride": stride, "padding": pad, "channels_out": cout}
        if src:
            params["input"] = src
        return self.add(name, "conv", **params)

    def tap(self, name):
        self.taps.append(name)
        return name

    def dump(self):
        return {"name": self.name, "input": {"channels": 3, "size": 224},
                "layers": self.layers, "taps": self.taps}


def alexnet():
    n = Net("alexnet")
    n.conv("conv0.conv", 64, 11, 4, 2)
    n.tap(n.add("conv0", "relu"))
    n.tap(n.add("pool1", "maxpool", kernel=3, stride=2))
    n.conv("conv1.0.conv", 192, 5, 1, 2)
    n.tap(n.add("conv1.0", "relu"))
    n.tap(n.add("pool2", "maxpool", kernel=3, stride=2))
    for i, c in enumerate((384, 256, 256)):
        n.conv(f"conv2.{i}.conv", c, 3, 1, 1)
        n.tap(n.add(f"conv2.{i}", "relu"))
    n.tap(n.add("pool3", "maxpool", kernel=3, stride=2))
    return n


def vgg16(bn):
    n = Net("vgg16_bn" if bn else "vgg16")
    stages = [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)]
    for s, (c, reps) in enumerate(stages):
        for r in range(reps):
            n.conv(f"conv{s}.{r}.conv", c, 3, 1, 1)
            if bn:
                n.add(f"conv{s}.{r}.bn", "batchnorm")
            n.tap(n.add(f"conv{s}.{r}", "relu"))
        n.tap(n.add(f"pool{s + 1}", "maxpool", kernel=2, stride=2))
    return n


def resnet(depth):
    blocks = {18: [2, 2, 2, 2], 34: [3, 4, 6, 3]}[depth]
    n = Net(f"resnet{depth}")
    n.conv("conv0.conv", 64, 7, 2, 3)
    n.add("conv0.bn", "batchnorm")
    n.tap(n.add("conv0", "relu"))
    prev = n.tap(n.add("pool1", "maxpool", kernel=3, stride=2, padding=1))
    cin = 64
    for s, reps in enumerate(blocks):
        cout = 64 * 2 ** s
        for r in range(reps):
            name = f"resblk{s + 1}.{r}"
            stride = 2 if (r == 0 and s > 0) else 1
            n.conv(f"{name}.conv1", cout, 3, stride, 1, src=prev)
            n.add(f"{name}.bn1", "batchnorm")
            n.add(f"{name}.relu1", "relu")
            n.conv(f"{name}.conv2", cout, 3, 1, 1)
            main = n.add(f"{name}.bn2", "batchnorm")
            skip = prev
            if stride != 1 or cin != cout:
                n.conv(f"{name}.down.conv", cout, 1, stride, 0, src=prev)
                skip = n.add(f"{name}.down.bn", "batchnorm")
            n.add(f"{name}.add", "add", inputs=[main, skip])
            prev = n.tap(n.add(name, "relu"))
            cin = cout
    return n


def densenet(depth):
    blocks = {121: [6, 12, 24, 16], 169: [6, 12, 32, 32]}[depth]
    growth = 32
    n = Net(f"densenet{depth}")
    n.conv("conv0.conv", 64, 7, 2, 3)
    n.add("conv0.bn", "batchnorm")
    n.tap(n.add("conv0", "relu"))
    prev = n.tap(n.add("pool1", "maxpool", kernel=3, stride=2, padding=1))
    channels = 64
    for b, reps in enumerate(blocks):
        blk = f"denseblk{b + 1}"
        for r in range(reps):
            ln = f"{blk}.layer{r}"
            n.add(f"{ln}.bn1", "batchnorm", input=prev)
            n.add(f"{ln}.relu1", "relu")
            n.conv(f"{ln}.conv1", 4 * growth, 1)
            n.add(f"{ln}.bn2", "batchnorm")
            n.add(f"{ln}.relu2", "relu")
            new = n.conv(f"{ln}.conv2", growth, 3, 1, 1)
            name = blk if r == reps - 1 else f"{ln}.cat"
            prev = n.add(name, "concat", inputs=[prev, new])
            channels += growth
        n.tap(blk)
        if b == len(blocks) - 1:
            n.tap(n.add("bn1", "batchnorm"))
            break
        tb = f"transblk{b + 1}"
        n.add(f"{tb}.bn", "batchnorm")
        n.add(f"{tb}.relu", "relu")
        channels //= 2
        n.conv(f"{tb}.conv", channels, 1)
        prev = n.tap(n.add(tb, "avgpool", kernel=2, stride=2))
    return n


def antialias(net):
    """Rewrite downscaling layers into their anti-aliased counterparts."""
    out = Net(net.name + "_aa")
    out.taps = list(net.taps)
    for layer in net.layers:
        op = layer["op"]
        p = dict(layer.get("params", {}))
        if op == "maxpool":
            q = {"stride": 2, "max_kernel": p["kernel"], "max_padding": p.get("padding", 0)}
            if "input" in p:
                q["input"] = p["input"]
            out.add(layer["name"], "blurpool", **q)
        elif op == "avgpool":
            q = {"stride": 2}
            if "input" in p:
                q["input"] = p["input"]
            out.add(layer["name"], "blurpool", **q)
        elif op == "conv" and p.get("stride", 1) > 1:
            # strided conv: half the stride, then a blur that keeps the original name
            p["stride"] //= 2
            out.layers.append({"name": layer["name"] + ".dense", "op": "conv", "params": p})
            out.add(layer["name"], "blurpool", stride=2)
        else:
            out.layers.append(layer)
    return out


def main():
    dest = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "configs")
    dest.mkdir(parents=True, exist_ok=True)
    nets = [alexnet(), vgg16(False), vgg16(True), resnet(18), resnet(34),
            densenet(121), densenet(169)]
    for net in nets:
        for variant in (net, antialias(net)):
            path = dest / f"{variant.name}.json"
            path.write_text(json.dumps(variant.dump(), indent=1) + "\n")
            print(path)


if __name__ == "__main__":
    main()
