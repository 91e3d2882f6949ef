"""SVG snapshots of recorded formation frames.

Each frame becomes one standalone SVG: the belt rectangle, every sensing
disk, and the current tree edges. Colors follow the role convention used
throughout: dominant sensors green, flatten-path sensors blue, everything
else yellow. The viewBox is fixed to the belt plus one sensing radius of
margin so a frame sequence does not jitter.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParameterError
from .model import Deployment, Frame, RunResult

_DISK_STYLE = 'fill="{color}" fill-opacity="0.45" stroke="#555555" stroke-width="{sw}"'


def frame_to_svg(frame: Frame, deployment: Deployment) -> str:
    belt = deployment.belt
    rs = deployment.rs
    margin = rs
    width = belt.length + 2 * margin
    height = belt.width + 2 * margin
    sw = rs / 12.0

    def Y(y: float) -> float:
        # SVG y grows downward; world y grows upward.
        return belt.width - y

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{-margin:g} {-margin:g} {width:g} {height:g}" '
        f'width="{width * 20:g}" height="{height * 20:g}" data-iteration="{frame.iteration}">',
        f'<rect x="0" y="0" width="{belt.length:g}" height="{belt.width:g}" '
        f'fill="none" stroke="#000000" stroke-width="{sw:g}"/>',
    ]
    for (u, v) in frame.tree_edges:
        ux, uy = frame.positions[u]
        vx, vy = frame.positions[v]
        out.append(
            f'<line x1="{ux:.6g}" y1="{Y(uy):.6g}" x2="{vx:.6g}" y2="{Y(vy):.6g}" '
            f'stroke="#333333" stroke-width="{sw:g}"/>'
        )
    dominant = set(frame.dominant_ids)
    flat = set(frame.flatten_ids)
    for sensor_id in sorted(frame.positions):
        x, y = frame.positions[sensor_id]
        if sensor_id in dominant:
            color = "green"
        elif sensor_id in flat:
            color = "blue"
        else:
            color = "yellow"
        style = _DISK_STYLE.format(color=color, sw=f"{sw:g}")
        out.append(f'<circle cx="{x:.6g}" cy="{Y(y):.6g}" r="{rs:g}" {style}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg_frames(result: RunResult, deployment: Deployment, out_dir: str | Path) -> list[Path]:
    """Write one SVG per recorded frame; returns the written paths in order."""
    if not result.frames:
        return []
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ParameterError(f"cannot create frame directory {out}: {exc}") from exc
    paths = []
    for k, frame in enumerate(result.frames):
        path = out / f"frame_{k:05d}.svg"
        path.write_text(frame_to_svg(frame, deployment))
        paths.append(path)
    return paths
