"""Command-line client for the lab service.

A thin client: every subcommand speaks HTTP to the FastAPI app, by default
through an in-process transport (no server needed), or to a remote instance
via --server.  File input/output happens on the client side; the service
stays stateless.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .service.app import create_app


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # sync bridge over the in-process ASGI app (same httpx.Client API)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    return TestClient(create_app(), base_url="http://lab")


def _post(ctx, path: str, payload: dict) -> dict:
    with _client(ctx.obj.get("server")) as client:
        resp = client.post(path, json=payload)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
        return resp.json()


def _weight_payload(weight_file: str | None, beta: float, radius: int) -> dict:
    if weight_file:
        entries = {}
        for line in Path(weight_file).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, v = line.split()
            entries[int(k)] = float(v)
        m = max(abs(k) for k in entries)
        return {"kind": "table", "values": [entries[k] for k in range(-m, m + 1)]}
    return {"kind": "exponential", "beta": beta, "M": radius}


def _function_payload(path: str) -> dict:
    text = Path(path).read_text()
    header = text.strip().splitlines()[0]
    if header.startswith("u,"):
        us, rs = [], []
        for line in text.strip().splitlines()[1:]:
            u, r = line.split(",")
            us.append(float(u))
            rs.append(float(r))
        return {"us": us, "rs": rs}
    left = 0.0
    bps, vals = [], []
    for line in text.strip().splitlines()[1:]:
        b, v = line.split(",")
        if b.strip() in ("-inf", "-Inf", ""):
            left = float(v)
        else:
            bps.append(float(b))
            vals.append(float(v))
    return {"breakpoints": bps, "values": vals, "left_value": left}


@click.group()
@click.option("--server", default=None, help="Remote service URL (default: in-process)")
@click.option("--seed", default=0, type=int, help="Master seed", show_default=True)
@click.option("--threads", default=1, type=int, help="Worker threads", show_default=True)
@click.option("--out", default=".", type=click.Path(), help="Output directory", show_default=True)
@click.pass_context
def main(ctx, server, seed, threads, out):
    """Self-repelling walk lab: simulation, metrics, and experiments."""
    ctx.ensure_object(dict)
    ctx.obj.update(server=server, seed=seed, threads=threads, out=Path(out))


def _walk_options(fn):
    fn = click.option("--weight-file", default=None, type=click.Path(exists=True),
                      help="Plain-text 'k value' weight table")(fn)
    fn = click.option("--beta", default=1.0, show_default=True,
                      help="Exponential weight rate (ignored with --weight-file)")(fn)
    fn = click.option("--radius", default=8, show_default=True, help="Weight window radius")(fn)
    fn = click.option("-N", "--scale", "n_scale", default=100, show_default=True)(fn)
    fn = click.option("-x", default=1.0, show_default=True)(fn)
    fn = click.option("--theta", default=0.5, show_default=True)(fn)
    fn = click.option("--iota", default=-1, type=click.Choice(["-1", "1"]), show_default=True)(fn)
    return fn


def _write_profile(out_dir: Path, name: str, data: dict, seed: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    cols = ["i", "ell_minus", "ell_plus"]
    extra = []
    if "zeta" in data:
        cols += ["zeta", "matched"]
        extra = [data["zeta"], [int(b) for b in data["matched"]]]
    rows = [range(data["lo"], data["hi"] + 1), data["ell_minus"], data["ell_plus"], *extra]
    lines = [",".join(cols)]
    lines += [",".join(str(v) for v in row) for row in zip(*rows)]
    (out_dir / f"{name}.csv").write_text("\n".join(lines) + "\n")
    meta = {k: data[k] for k in ("chi", "T", "I_minus", "I_plus", "meta")}
    meta["seed"] = seed
    (out_dir / f"{name}_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    click.echo(f"wrote {out_dir / (name + '.csv')} (T={data['T']}, I=[{data['I_minus']}, {data['I_plus']}])")


@main.command()
@_walk_options
@click.option("--backend", default="walk", type=click.Choice(["walk", "eta"]), show_default=True)
@click.pass_context
def simulate(ctx, weight_file, beta, radius, n_scale, x, theta, iota, backend):
    """Run one walk to its stopping time and export the local-time profile."""
    payload = {
        "weight": _weight_payload(weight_file, beta, radius),
        "N": n_scale, "x": x, "theta": theta, "iota": int(iota),
        "seed": ctx.obj["seed"], "backend": backend,
    }
    data = _post(ctx, "/simulate", payload)
    _write_profile(ctx.obj["out"], "profile", data, ctx.obj["seed"])


@main.command()
@_walk_options
@click.pass_context
def profile(ctx, weight_file, beta, radius, n_scale, x, theta, iota):
    """Chain-construction profile with the coupled field, exported as CSV."""
    payload = {
        "weight": _weight_payload(weight_file, beta, radius),
        "N": n_scale, "x": x, "theta": theta, "iota": int(iota),
        "seed": ctx.obj["seed"], "backend": "coupled",
    }
    data = _post(ctx, "/profile", payload)
    _write_profile(ctx.obj["out"], "coupled_profile", data, ctx.obj["seed"])


@main.command()
@click.option("--weight-file", default=None, type=click.Path(exists=True))
@click.option("--beta", default=1.0, show_default=True)
@click.option("--radius", default=8, show_default=True)
@click.option("--which", default="rho_minus",
              type=click.Choice(["rho_minus", "rho_zero", "nstep"]), show_default=True)
@click.option("-n", "steps", default=0, show_default=True, help="Chain length for --which nstep")
@click.pass_context
def rho(ctx, weight_file, beta, radius, which, steps):
    """Invariant (or n-step) distribution table as CSV."""
    payload = {"weight": _weight_payload(weight_file, beta, radius), "which": which, "n": steps}
    data = _post(ctx, "/rho", payload)
    out_dir = ctx.obj["out"]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{which}.csv"
    lines = ["index,probability"]
    for j, p in enumerate(data["probs"]):
        lines.append(f"{data['min_index'] + j + data['offset']:g},{p:.17g}")
    path.write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {path} (mean={data['mean']:.6g}, variance={data['variance']:.6g})")


@main.command()
@click.argument("f_csv", type=click.Path(exists=True))
@click.argument("g_csv", type=click.Path(exists=True))
@click.option("--which", default="m1", type=click.Choice(["m1", "m1_whole", "j1", "uniform"]),
              show_default=True)
@click.option("--interval", nargs=2, type=float, default=None, help="Restriction interval a b")
@click.option("--tol", default=1e-6, show_default=True)
@click.pass_context
def metric(ctx, f_csv, g_csv, which, interval, tol):
    """Distance between two CSV functions; prints lower,upper,tolerance."""
    payload = {
        "f": _function_payload(f_csv), "g": _function_payload(g_csv),
        "which": which, "interval": list(interval) if interval else None, "tol": tol,
    }
    data = _post(ctx, "/metric", payload)
    click.echo(f"{data['lower']:.9g},{data['upper']:.9g},{data['tolerance']:.3g}")


@main.command()
@click.argument("config_json", type=click.Path(exists=True))
@click.pass_context
def experiment(ctx, config_json):
    """Run an experiment from a JSON config; exit 0 iff every verdict passes."""
    cfg = json.loads(Path(config_json).read_text())
    cfg.setdefault("master_seed", ctx.obj["seed"])
    cfg.setdefault("threads", ctx.obj["threads"])
    data = _post(ctx, "/experiment", cfg)
    out_dir = ctx.obj["out"]
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = data.pop("samples", [])
    (out_dir / "result.json").write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    cols = list(samples[0].keys()) if samples else ["N", "replicate", "value"]
    lines = [",".join(cols)]
    lines += [",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols)
              for row in samples]
    (out_dir / "samples.csv").write_text("\n".join(lines) + "\n")
    for name, ok in data["verdicts"].items():
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name}")
    click.echo(f"wrote {out_dir / 'result.json'}")
    if not data["passed"]:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the lab service with uvicorn."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
