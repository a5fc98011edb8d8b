"""Fit a tilted floor plane from a point cloud containing a body.

Quantile regression at a low quantile hugs the bottom of the cloud, so the
dancer's points above the floor do not drag the estimate upward the way a
least-squares fit would.  Run:

    python3 demos/02_floor_estimation.py
"""

import numpy as np

from lmakit import fit_floor, height_above_floor


def main():
    rng = np.random.default_rng(0)

    # ground points on h = 0.08 * depth + 0.40, plus a body standing on it
    d_floor = rng.uniform(0.0, 6.0, 400)
    h_floor = 0.08 * d_floor + 0.40 + rng.exponential(0.01, 400)
    d_body = rng.uniform(2.0, 3.0, 200)
    h_body = 0.08 * d_body + 0.40 + rng.uniform(0.1, 1.8, 200)
    cloud = np.column_stack(
        [
            np.zeros(600),
            np.concatenate([h_floor, h_body]),
            np.concatenate([d_floor, d_body]),
        ]
    )

    plane = fit_floor(cloud, tau=0.05)
    print(f"true floor:      h = 0.08 * d + 0.40")
    print(f"estimated floor: h = {plane.slope:.4f} * d + {plane.intercept:.4f}")
    print(f"pinball loss: {plane.pinball_loss:.6f}")

    head = np.array([0.0, 2.1, 2.5])  # a head somewhere over the slope
    print(f"head at depth 2.5 is {height_above_floor(head, plane):.3f} m above the floor")


if __name__ == "__main__":
    main()
