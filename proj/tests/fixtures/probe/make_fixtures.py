"""Regenerates the synthetic representation dumps used by the probing tests."""
import json
import random
import struct

DIM = 8


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def vec(rng, shift):
    return [f32(rng.gauss(0.0, 1.0) + (shift if j < 3 else 0.0)) for j in range(DIM)]


def header(**extra):
    h = {"format_version": 1, "model_id": "synthetic-gauss", "layer": "last", "dim": DIM, "dtype": "f32"}
    h.update(extra)
    return h


def records(rng):
    out = []
    ids = [f"fld-{i:03d}" for i in range(40)]
    for pid in ids:
        label = rng.choice(["T", "F"])
        n = rng.randint(4, 8)
        # the signal appears only from the middle of the proof on
        onset = n // 2
        for i in range(1, n + 1):
            shift = (1.5 if label == "T" else -1.5) if i > onset else 0.0
            out.append({"problem_id": pid, "task": "CSS", "step_index": i, "label": label, "vector": vec(rng, shift)})
        for k in range(6):
            lab = "necessary" if k < 3 else "redundant"
            out.append({"problem_id": pid, "task": "RFI", "step_index": 0, "candidate_id": f"fact{k + 1}",
                        "label": lab, "vector": vec(rng, 2.0 if lab == "necessary" else -2.0)})
        for a in range(6):
            for k in range(6):
                lab = "derivable" if k < 3 else "not-derivable"
                out.append({"problem_id": pid, "task": "NSD", "step_index": a + 1, "candidate_id": f"step{a + 2 + k}",
                            "label": lab, "vector": vec(rng, 2.0 if lab == "derivable" else -2.0)})
    return ids, out


def write(path, head, recs):
    with open(path, "w") as f:
        f.write(json.dumps(head, separators=(",", ":")) + "\n")
        for r in recs:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def main():
    rng = random.Random(7)
    ids, recs = records(rng)
    write("synthetic_dump.jsonl", header(), recs)
    with open("split.json", "w") as f:
        json.dump({"train": ids[:30], "test": ids[30:]}, f, indent=1)
        f.write("\n")
    with open("leaky_split.json", "w") as f:
        json.dump({"train": ids[:30], "test": ids[29:]}, f, indent=1)
        f.write("\n")

    small = [r for r in recs if r["problem_id"] == ids[0]]
    # binary variant: vectors in a little-endian f32 sidecar
    with open("small_dump.jsonl.bin", "wb") as b:
        lines = []
        for i, r in enumerate(small):
            b.write(struct.pack(f"<{DIM}f", *r["vector"]))
            rr = {k: v for k, v in r.items() if k != "vector"}
            rr["offset"] = i * DIM * 4
            lines.append(rr)
    write("small_dump.jsonl", header(sidecar="small_dump.jsonl.bin"), lines)
    write("small_dump_text.jsonl", header(), small)

    bad = [dict(r) for r in small]
    bad[2] = dict(bad[2], vector=bad[2]["vector"][:-1])
    write("bad_width_dump.jsonl", header(), bad)
    with open("no_header_dump.jsonl", "w") as f:
        for r in small:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
    short = [r for r in small if not (r["task"] == "RFI" and r["candidate_id"] == "fact6")]
    write("short_rfi_dump.jsonl", header(), short)


if __name__ == "__main__":
    main()
