"""Figure generation from the horolab CLI artifacts.

Consumes only the documented file formats: the per-node curvature report
CSV (theta,phi,kappa_min,kappa_max,R_mean,lambda_min,lambda_max,S,C,regular),
the Newton residual CSV (iter,residual), the Schouten duality CSV
(theta,phi,lambda_i,lambda_star_i,product) and the Poincare-ball OBJ mesh.
Everything is rendered with a fixed style so reruns are byte-stable.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from mpl_toolkits.mplot3d.art3d import Poly3DCollection

KINDS = ("heatmap", "residuals", "dual", "mesh")

REPORT_COLUMNS = ("theta", "phi", "kappa_min", "kappa_max", "R_mean",
                  "lambda_min", "lambda_max", "S", "C", "regular")
RESIDUAL_COLUMNS = ("iter", "residual")
DUAL_COLUMNS = ("theta", "phi", "lambda_i", "lambda_star_i", "product")

FIG_DPI = 110


class SchemaError(Exception):
    """Input file does not match the documented schema."""


def _read_csv(path, required: Sequence[str]) -> Dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        cols = {c: np.array([float(r[c]) for r in rows]) for c in required}
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric data: {exc}") from None
    return cols


def read_report(path) -> Dict[str, np.ndarray]:
    return _read_csv(path, REPORT_COLUMNS)


def read_residuals(path) -> Dict[str, np.ndarray]:
    return _read_csv(path, RESIDUAL_COLUMNS)


def read_dual(path) -> Dict[str, np.ndarray]:
    return _read_csv(path, DUAL_COLUMNS)


def read_obj(path):
    """Vertices and triangle index array of a Poincare-ball OBJ mesh."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    verts: List[List[float]] = []
    faces: List[List[int]] = []
    for line in path.read_text().splitlines():
        parts = line.split()
        if not parts or parts[0] == "#":
            continue
        try:
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
        except (ValueError, IndexError):
            raise SchemaError(f"{path}: malformed line: {line!r}") from None
    if not verts or not faces:
        raise SchemaError(f"{path}: no vertices or faces")
    v = np.array(verts)
    f = np.array(faces)
    if f.min() < 0 or f.max() >= len(v):
        raise SchemaError(f"{path}: face index out of range")
    return v, f


def _node_grid(theta: np.ndarray, phi: np.ndarray, values: np.ndarray):
    # colatitude-major node order; recover the lat-long shape from the
    # number of distinct longitudes
    nphi = np.unique(np.round(phi, 12)).size
    if nphi == 0 or theta.size % nphi != 0:
        raise SchemaError("report nodes do not form a lat-long grid")
    ntheta = theta.size // nphi
    return (theta.reshape(ntheta, nphi), phi.reshape(ntheta, nphi),
            values.reshape(ntheta, nphi))


def _save(fig, out_path):
    fig.savefig(out_path, dpi=FIG_DPI, metadata={"Software": None})
    plt.close(fig)


def plot_heatmap(report_csv, out_path, column: str = "C") -> None:
    """Sphere heatmap of one report column over (theta, phi)."""
    cols = read_report(report_csv)
    if column not in cols:
        raise SchemaError(f"unknown report column: {column}")
    th, ph, val = _node_grid(cols["theta"], cols["phi"], cols[column])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    mesh = ax.pcolormesh(ph, th, val, shading="nearest", cmap="viridis")
    ax.invert_yaxis()
    ax.set_xlabel("phi")
    ax.set_ylabel("theta")
    ax.set_title(f"{column} over the sphere")
    fig.colorbar(mesh, ax=ax, label=column)
    _save(fig, out_path)


def plot_residuals(residuals_csv, out_path) -> None:
    """Newton residual history on a log scale."""
    cols = read_residuals(residuals_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(cols["iter"], np.maximum(cols["residual"], 1e-300),
                marker="o", color="tab:blue")
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("sup-norm residual")
    ax.set_title("solver convergence")
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, out_path)


def plot_dual(dual_csv, out_path, bins: int = 40) -> None:
    """Histogram of the lambda * lambda-star products."""
    cols = read_dual(dual_csv)
    prod = cols["product"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.hist(prod, bins=bins, color="tab:green", edgecolor="black")
    ax.axvline(1.0, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel("lambda_i * lambda_star_i")
    ax.set_ylabel("count")
    ax.set_title("Schouten duality products")
    _save(fig, out_path)


def plot_mesh(obj_path, out_path) -> None:
    """Shaded render of the Poincare-ball mesh from a fixed viewpoint."""
    verts, faces = read_obj(obj_path)
    fig = plt.figure(figsize=(5.0, 5.0))
    ax = fig.add_subplot(projection="3d")
    tris = verts[faces]
    # color triangles by the ball radius of their centroid
    radii = np.linalg.norm(tris.mean(axis=1), axis=1)
    span = radii.max() - radii.min()
    shade = (radii - radii.min()) / span if span > 0 else np.zeros_like(radii)
    coll = Poly3DCollection(tris, linewidths=0.1, edgecolor="gray")
    coll.set_facecolor(plt.get_cmap("viridis")(0.25 + 0.5 * shade))
    ax.add_collection3d(coll)
    lim = float(np.max(np.abs(verts))) * 1.05
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_zlim(-lim, lim)
    ax.set_box_aspect((1, 1, 1))
    ax.view_init(elev=22.0, azim=-58.0)
    ax.set_axis_off()
    ax.set_title("hypersurface in the Poincare ball")
    _save(fig, out_path)


@dataclass
class PlotJob:
    """One rendering request: input artifacts, output directory, kinds."""

    out_dir: Path
    report_csv: Optional[Path] = None
    residuals_csv: Optional[Path] = None
    dual_csv: Optional[Path] = None
    mesh_obj: Optional[Path] = None
    kinds: Sequence[str] = field(default_factory=lambda: list(KINDS))
    heatmap_column: str = "C"

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        bad = [k for k in self.kinds if k not in KINDS]
        if bad:
            raise SchemaError(f"unknown plot kinds: {', '.join(bad)}")


def render(job: PlotJob) -> List[Path]:
    """Render every requested kind; returns the written image paths."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    inputs = {
        "heatmap": job.report_csv,
        "residuals": job.residuals_csv,
        "dual": job.dual_csv,
        "mesh": job.mesh_obj,
    }
    written: List[Path] = []
    for kind in job.kinds:
        src = inputs[kind]
        if src is None:
            raise SchemaError(f"no input file given for kind {kind!r}")
        out = job.out_dir / f"{kind}.png"
        if kind == "heatmap":
            plot_heatmap(src, out, job.heatmap_column)
        elif kind == "residuals":
            plot_residuals(src, out)
        elif kind == "dual":
            plot_dual(src, out)
        else:
            plot_mesh(src, out)
        written.append(out)
    return written
