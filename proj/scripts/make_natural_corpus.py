#!/usr/bin/env python3
"""Write a corpus of natural 224x224x3 u8 NPY crops drawn from the sample
images bundled with scikit-image and scikit-learn."""
import argparse
import pathlib

import numpy as np
from skimage import data, transform


def sources():
    names = ["astronaut", "coffee", "chelsea", "rocket", "hubble_deep_field", "retina",
             "immunohistochemistry", "grass", "gravel", "brick", "camera", "moon",
             "coins", "horse", "stereo_motorcycle", "cat", "page", "text", "clock",
             "colorwheel", "logo", "microaneurysms", "eagle"]
    out = []
    for name in names:
        fn = getattr(data, name, None)
        if fn is None:
            continue
        try:
            img = fn()
        except Exception:
            continue
        if isinstance(img, tuple):
            img = img[0]
        out.append((name, img))
    try:
        from sklearn.datasets import load_sample_images
        for i, img in enumerate(load_sample_images().images):
            out.append((f"sklearn{i}", img))
    except Exception:
        pass
    return out


def to_rgb_float(img):
    img = np.asarray(img)
    if img.dtype == bool:
        img = img.astype(np.float64)
    elif img.dtype.kind in "ui":
        img = img.astype(np.float64) / np.iinfo(img.dtype).max
    else:
        img = img.astype(np.float64)
        lo, hi = img.min(), img.max()
        img = (img - lo) / (hi - lo if hi > lo else 1.0)
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    if img.shape[-1] == 4:
        img = img[..., :3]
    return img


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--count", type=int, default=120)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    imgs = []
    for name, img in sources():
        rgb = to_rgb_float(img)
        if min(rgb.shape[:2]) < 64:
            continue
        scale = 256.0 / min(rgb.shape[:2])
        shape = (round(rgb.shape[0] * scale), round(rgb.shape[1] * scale), 3)
        imgs.append((name, transform.resize(rgb, shape, anti_aliasing=True)))
    for i in range(args.count):
        name, img = imgs[i % len(imgs)]
        r = rng.integers(0, img.shape[0] - 224 + 1)
        c = rng.integers(0, img.shape[1] - 224 + 1)
        crop = img[r:r + 224, c:c + 224]
        if rng.random() < 0.5:
            crop = crop[:, ::-1]
        u8 = np.clip(np.rint(crop * 255.0), 0, 255).astype(np.uint8)
        np.save(out / f"{i:04d}_{name}.npy", np.ascontiguousarray(u8))
    print(f"wrote {args.count} crops from {len(imgs)} sources to {out}")


if __name__ == "__main__":
    main()
