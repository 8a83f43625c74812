#!/usr/bin/env python3
"""Regenerate the sample fixtures in data/.

The profile is exactly linear in the latency-model features, so `hetplan fit`
reproduces it with zero residuals; coefficients are synthetic but shaped so
the bigger device wins at high precision while the smaller one has fast
low-bit kernels.
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "data")

BITS = [3, 4, 8, 16]

DEVICES = {
    # name: (mem_bytes, link_bw_bytes_per_s, supported_bits, speed at bit)
    "small-a": (16 * 1024, 1.0e6, BITS, {3: 0.55, 4: 0.6, 8: 0.8, 16: 1.6}),
    "big-b": (24 * 1024, 1.0e6, BITS, {3: 0.9, 4: 0.85, 8: 0.7, 16: 0.75}),
}


def prefill_latency(speed, v, s):
    # c0 + c1*v + c2*s + c3*v*s + c4*v*s^2, scaled by the device/bit speed
    return speed * (2e-4 + 1e-5 * v + 2e-6 * s + 3e-6 * v * s + 1e-9 * v * s * s)


def decode_latency(speed, v, s, t):
    # c0 + c1*v + c2*v*(t+s) + c3*(t+s)
    return speed * (1e-4 + 5e-6 * v + 2e-8 * v * (t + s) + 1e-8 * (t + s))


def write_profile(path):
    rows = ["device,bit,phase,v,s,t,latency_s"]
    for name, (_, _, bits, speed) in DEVICES.items():
        for bit in bits:
            for v in (1, 2, 4):
                for s in (8, 16, 32):
                    rows.append(
                        f"{name},{bit},prefill,{v},{s},0,"
                        f"{prefill_latency(speed[bit], v, s):.12e}")
                for ts in (8, 16, 32):
                    rows.append(
                        f"{name},{bit},decode,{v},16,{ts},"
                        f"{decode_latency(speed[bit], v, 16, ts):.12e}")
    with open(path, "w") as f:
        f.write("\n".join(rows) + "\n")


def write_stats(path, num_layers=4):
    ops = [("qkv", 192), ("out", 64), ("fc1", 256), ("fc2", 256)]
    rows = ["layer,operator,d_w,w_min,w_max,x_mean,x_var"]
    for layer in range(num_layers):
        for k, (op, d_w) in enumerate(ops):
            w = round(0.4 + 0.1 * ((layer + k) % 3), 2)
            rows.append(f"{layer},{op},{d_w},{-w},{w},0.05,{1.0 + 0.25 * k}")
    with open(path, "w") as f:
        f.write("\n".join(rows) + "\n")


def write_config(path):
    cfg = {
        "format_version": 1,
        "model": {"preset": "tiny-test"},
        "cluster": {
            "devices": [
                {
                    "name": name,
                    "mem_bytes": mem,
                    "link_bw_bytes_per_s": bw,
                    "supported_bits": bits,
                }
                for name, (mem, bw, bits, _) in DEVICES.items()
            ]
        },
        "workload": {"B": 4, "s": 16, "n": 8},
        "bits": BITS,
    }
    with open(path, "w") as f:
        json.dump(cfg, f, indent=2)
        f.write("\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    write_config(os.path.join(OUT, "sample_config.json"))
    write_profile(os.path.join(OUT, "sample_profile.csv"))
    write_stats(os.path.join(OUT, "sample_calibration.csv"))
    print(f"wrote sample fixtures to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()
