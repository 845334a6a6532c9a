"""Plain SVG sketches of trajectories, for eyeballing against figures."""

from .geometry import barycentric_to_cartesian

SIZE = 400
PAD = 20


def _polyline(points, colour):
    pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in points)
    return f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>'


def _square_frame(square):
    out = [f'<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>']
    for b in square.breakpoints_x:
        x = PAD + float(b) * SIZE
        out.append(f'<line x1="{x:.3f}" y1="{PAD}" x2="{x:.3f}" y2="{PAD + SIZE}" stroke="grey"/>')
    for b in square.breakpoints_y:
        y = PAD + (1 - float(b)) * SIZE
        out.append(f'<line x1="{PAD}" y1="{y:.3f}" x2="{PAD + SIZE}" y2="{y:.3f}" stroke="grey"/>')
    return out


def _triangle(offset):
    corners = [barycentric_to_cartesian(v) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    pts = [(offset + PAD + x * SIZE, PAD + SIZE - y * SIZE) for x, y in corners]
    return _polyline(pts + pts[:1], "black")


def trajectory_svg(traj, square=None):
    """Square picture for projected runs, two triangles (A left, B right)
    for 3x3 runs in the simplices."""
    body = []
    if square is not None:
        body += _square_frame(square)
        pts = [(PAD + float(e.state[0]) * SIZE, PAD + (1 - float(e.state[1])) * SIZE) for e in traj.events]
        body.append(_polyline(pts, "crimson"))
        width = SIZE + 2 * PAD
    else:
        n = len(traj.events[0].state) // 2
        if n != 3:
            raise ValueError("simplex pictures need 3 actions per player")
        for side in (0, 1):
            offset = side * (SIZE + PAD)
            body.append(_triangle(offset))
            pts = []
            for e in traj.events:
                x, y = barycentric_to_cartesian(e.state[side * 3 : side * 3 + 3])
                pts.append((offset + PAD + x * SIZE, PAD + SIZE - y * SIZE))
            body.append(_polyline(pts, "crimson" if side == 0 else "steelblue"))
        width = 2 * SIZE + 3 * PAD
    height = SIZE + 2 * PAD
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n' + "\n".join(body) + "\n</svg>\n"
    )
