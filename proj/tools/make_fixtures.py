#!/usr/bin/env python3
"""Regenerates the input fixtures under data/.

The quality profiles are produced afterwards by `srplan synthesize`; see
data/README.md for the exact commands.
"""
import json
import pathlib
import sys

import numpy as np

DATA = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data")

ENGINES = [
    {"name": "CPU", "precision": "fp32", "psnr_preserving": True},
    {"name": "GPU", "precision": "fp16", "psnr_preserving": True},
    {"name": "DSP", "precision": "int8", "psnr_preserving": False},
]

# id, params (K), CPU, GPU, DSP latency per 4x upscaled image (ms)
SDM845 = [
    ("m_ref", 152, 4570.08, 2792.43, 1220.0),
    ("m_rn2", 58, 2694.94, 2626.78, 1508.56),
    ("m_rn4", 22, 1434.42, 2657.49, 1561.97),
    ("m_rxn", 30, 1850.82, 10692.13, 2508.63),
    ("m_m1", 30, 1969.74, 2723.66, 1080.59),
    ("m_eff", 24, 1284.21, 2700.24, 1398.407),
    ("m_m2", 88, 4045.80, 2846.70, 1327.65),
    ("m_clc", 30, 1910.74, 2722.86, 1061.38),
    ("m_s1", 13, 1263.90, 12367.24, 3060.82),
    ("m_s2", 17, 1023.26, 2595.59, 973.07),
]

TRANSFORMS = {
    "m_ref": [],
    "m_rn2": [("rb", 2)],
    "m_rn4": [("rb", 4)],
    "m_rxn": [("rb", 2), ("grp", 4)],
    "m_m1": [("dpth", None)],
    "m_eff": [("rb", 2), ("dpth", None), ("sep", None)],
    "m_m2": [("dpth", None), ("invr", 2)],
    "m_clc": [("grp", 4), ("chlshf", None)],
    "m_s1": [("rb", 2), ("grp", 4), ("dpth", None), ("chlshf", None)],
    "m_s2": [("chlsplt", None), ("dpth", None), ("chlshf", None)],
}

# Error drop on the full-precision engines, used to order the synthetic
# quality chain (best first).
ERROR_PCT = {
    "m_ref": 0.0, "m_clc": 1.93, "m_m2": 2.32, "m_m1": 2.48, "m_rn2": 2.84,
    "m_s2": 3.03, "m_eff": 3.19, "m_rxn": 3.70, "m_rn4": 3.94, "m_s1": 4.69,
}


def dump(name, doc):
    (DATA / name).write_text(json.dumps(doc, indent=2) + "\n")


def profile(per_patch_divisor):
    latency = {}
    for mid, _, cpu, gpu, dsp in SDM845:
        latency[mid] = {
            "CPU": round(cpu / per_patch_divisor, 6),
            "GPU": round(gpu / per_patch_divisor, 6),
            "DSP": round(dsp / per_patch_divisor, 6),
        }
    return {"engines": ENGINES, "patch_size": [90, 160], "t_stitch_ms": 0.0,
            "latency_ms": latency}


def layer(S, D, K, fixed, Fh=360, Fw=640):
    return {"S": S, "D": D, "Kh": K, "Kw": K, "Fh": Fh, "Fw": Fw, "g": 1, "fixed": fixed}


def catalog():
    layers = [layer(3, 64, 3, True)] + [layer(64, 64, 3, False) for _ in range(8)] + [
        layer(64, 48, 3, True)]
    models = []
    for mid, params, *_ in SDM845:
        models.append({
            "id": mid,
            "ref_id": "m_ref",
            "applied": [{"kind": k, "param": p} for k, p in TRANSFORMS[mid]],
            "params_k": params,
            "theta_ref": f"weights/{mid}.bin",
            "layers": layers,
        })
    return {"models": models}


def curve(tv_max):
    order = sorted(ERROR_PCT, key=lambda m: ERROR_PCT[m])
    gaps = []
    prev = 0.0
    for mid in order[1:]:
        # dB below the reference on easy patches; hard patches keep 10% of it
        drop = 0.27 * ERROR_PCT[mid]
        step = drop - prev
        prev = drop
        gaps.append({"model": mid, "gap": [[0.0, step], [tv_max, 0.1 * step]]})
    return {"base_model": "m_ref", "psnr": [[0.0, 38.0], [tv_max, 22.0]],
            "gaps": gaps, "noise_db": 0.25}


def sample_image(height=360, width=640, seed=7):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    base = 60 + 120 * xx / width + 40 * yy / height
    img = np.stack([base, base * 0.8 + 20, 200 - base * 0.5], axis=-1)
    # texture amplitude grows left to right and top to bottom
    amp = 2 + 70 * (xx / width) * (yy / height)
    img += rng.normal(size=img.shape) * amp[..., None]
    stripes = ((xx // 3 + yy // 3) % 2) * 40 * (yy > height * 0.6) * (xx > width * 0.5)
    img += stripes[..., None]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_ppm(path, img):
    h, w, _ = img.shape
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + img.tobytes())


def scenario6():
    engines = [dict(e) for e in ENGINES]
    return {"engines": engines, "patch_size": [90, 160], "t_stitch_ms": 0.0,
            "latency_ms": {"m1": {"CPU": 40, "GPU": 30, "DSP": None},
                           "m2": {"CPU": None, "GPU": None, "DSP": 10}}}


def pareto3():
    points = {"a": (28.0, 100.0), "b": (27.0, 120.0), "c": (29.0, 150.0)}
    catalog = {"models": [
        {"id": "c", "ref_id": "c", "applied": [], "params_k": 90},
        {"id": "a", "ref_id": "c", "applied": [{"kind": "grp", "param": 2}], "params_k": 40},
        {"id": "b", "ref_id": "c", "applied": [{"kind": "sep", "param": None}], "params_k": 60},
    ]}
    profile = {"engines": [{"name": "CPU", "precision": "fp32", "psnr_preserving": True}],
               "patch_size": [90, 160], "t_stitch_ms": 0.0,
               "latency_ms": {m: {"CPU": lat} for m, (_, lat) in points.items()}}
    quality = {"records": [{"patch_id": f"p{i}", "tv": float(tv),
                            "psnr": {m: db for m, (db, _) in points.items()}}
                           for i, tv in enumerate([10, 40, 25, 70])]}
    return catalog, profile, quality


def no_feasible():
    # The reference is dominated on every engine by models that each miss a
    # psnr-preserving engine, so no retained pair can be scheduled.
    catalog = {"models": [
        {"id": "m0", "ref_id": "m0", "applied": [], "params_k": 100},
        {"id": "m1", "ref_id": "m0", "applied": [{"kind": "grp", "param": 2}], "params_k": 50},
        {"id": "m2", "ref_id": "m0", "applied": [{"kind": "grp", "param": 4}], "params_k": 50},
    ]}
    profile = {"engines": ENGINES, "patch_size": [90, 160], "t_stitch_ms": 0.0,
               "latency_ms": {"m0": {"CPU": 10, "GPU": 10, "DSP": 10},
                              "m1": {"CPU": 5, "GPU": None, "DSP": 5},
                              "m2": {"CPU": None, "GPU": 5, "DSP": 5}}}
    quality = {"records": [{"patch_id": f"p{i}", "tv": float(i),
                            "psnr": {"m0": 30.0, "m1": 31.0, "m2": 31.0}} for i in range(4)]}
    return catalog, profile, quality


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    dump("sdm845_profile.json", profile(1))
    dump("sdm845_patch_profile.json", profile(64))
    dump("catalog.json", catalog())
    dump("quality_curve.json", curve(1.2e6))
    write_ppm(DATA / "sample.ppm", sample_image())
    dump("scenario6_profile.json", scenario6())
    catalog3, profile3, quality3 = pareto3()
    dump("pareto3_catalog.json", catalog3)
    dump("pareto3_profile.json", profile3)
    dump("pareto3_quality.json", quality3)
    for name, doc in zip(("catalog", "profile", "quality"), no_feasible()):
        dump(f"nofeasible_{name}.json", doc)


if __name__ == "__main__":
    main()
