"""Generate a small synthetic dance corpus and inspect one recording.

Each of the ten built-in styles layers per-joint oscillators on a standing
pose; pauses freeze the clock and bursts accelerate it, so every style has
a distinct kinematic signature.  Run:

    python3 demos/01_synthesize_motion.py
"""

from pathlib import Path

import numpy as np

from lmakit import default_styles, generate_corpus, save_sequence
from lmakit.charts import svg_line_chart

OUT = Path("demo_out/synth")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    seqs = generate_corpus(default_styles(), per_style=3, duration=4.0, master_seed=42)
    print(f"generated {len(seqs)} sequences ({len(set(s.label for s in seqs))} styles)")

    for seq in seqs[:3]:
        save_sequence(seq, OUT / f"{seq.group_id}.jsonl")
        print(f"  saved {seq.group_id}: {seq.n_frames} frames at {seq.fps:.0f} fps")

    # contrast hand height traces for a smooth and a bursty style
    series = []
    for style in ("glide", "snap"):
        seq = next(s for s in seqs if s.group_id == f"{style}_00")
        y = seq.joint("left_hand")[:, 1]
        t = np.arange(len(y)) / seq.fps
        series.append((style, t.tolist(), y.tolist()))
    svg_line_chart(series, OUT / "hand_height.svg",
                   xlabel="time (s)", ylabel="left-hand height (m)",
                   title="Smooth vs bursty styles")
    print(f"wrote {OUT / 'hand_height.svg'}")


if __name__ == "__main__":
    main()
