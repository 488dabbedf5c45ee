"""Command-line front end: ``gradcat classify | blowup | region | trace | oracle``.

Exit codes: 0 success, 2 usage or parse error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import functools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from .criteria import blows_up
from .decisive import decisive_function
from .dynamics import ORACLE_T_MAX, integrate_extended_oracle, trace_characteristic
from .epmodels import EPModel, model_matrix, sample_region
from .errors import GradcatError, InvalidInputError
from .linalg2 import ComplexPair, Matrix2, RealDistinct, jordanize
from .sampling import stratified_instances

EXIT_NUMERIC = 3
EXIT_IO = 4
MARGIN = 1e-6


class FloatList(click.ParamType):
    """Comma-separated finite reals of a fixed length."""

    def __init__(self, n: int):
        self.n = n
        self.name = f"{n} comma-separated numbers"

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split(",")
        if len(parts) != self.n:
            self.fail(f"expected {self.n} comma-separated numbers, got {value!r}", param, ctx)
        try:
            nums = tuple(float(p) for p in parts)
        except ValueError:
            self.fail(f"could not parse {value!r} as numbers", param, ctx)
        if not all(math.isfinite(x) for x in nums):
            self.fail(f"non-finite entry in {value!r}", param, ctx)
        return nums


def _emit_json(doc) -> None:
    click.echo(json.dumps(doc))


def _matrix_options(f):
    f = click.option("--model", type=FloatList(3), default=None,
                     help="Euler-Poisson model k,N,gamma with Q = [[-gamma, k], [N, 0]].")(f)
    f = click.option("--Q", "Q", type=FloatList(4), default=None,
                     help="Matrix entries a,b,c,d in row-major order.")(f)
    return f


def _resolve_q(Q, model) -> Matrix2:
    if (Q is None) == (model is None):
        raise click.UsageError("give exactly one of --Q or --model")
    if Q is not None:
        return Matrix2(*Q)
    k, N, gamma = model
    if k not in (-1.0, 1.0) or N not in (0.0, 1.0):
        raise click.BadParameter("k must be +1 or -1 and N must be 0 or 1", param_hint="--model")
    try:
        return model_matrix(EPModel(int(k), int(N), gamma))
    except InvalidInputError as exc:
        raise click.BadParameter(str(exc), param_hint="--model") from exc


def _numeric_guard(f):
    """Map library failures to exit code 3 and file errors to exit code 4."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except GradcatError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@click.group()
def main():
    """Gradient blow-up criteria for V_t + V1 V_x = Q V.

    Matrices are passed as --Q a,b,c,d (row-major) or --model k,N,gamma.
    """


@main.command()
@_matrix_options
@_numeric_guard
def classify(Q, model):
    """Spectral class and Jordan form of Q as JSON."""
    jd = jordanize(_resolve_q(Q, model))
    spec = jd.spectrum
    doc = {"class": spec.kind}
    if isinstance(spec, ComplexPair):
        doc.update(alpha=spec.alpha, beta=spec.beta)
    elif isinstance(spec, RealDistinct):
        doc.update(lambda1=spec.lam1, lambda2=spec.lam2)
    else:
        doc.update({"lambda": spec.lam})
    doc["eigenvalues"] = [[complex(z).real, complex(z).imag] for z in spec.eigenvalues]
    doc["J"] = jd.J.to_list()
    doc["A"] = jd.A.to_list()
    doc["detA"] = jd.detA
    _emit_json(doc)


@main.command()
@_matrix_options
@click.option("--v0", type=FloatList(2), required=True, help="Initial gradients v1,v2.")
@click.option("--time", "want_time", is_flag=True, help="Also compute the blow-up time t*.")
@_numeric_guard
def blowup(Q, model, v0, want_time):
    """Blow-up verdict for one characteristic as JSON."""
    verdict = blows_up(_resolve_q(Q, model), v0, want_time=want_time)
    _emit_json(verdict.as_dict())


@main.command()
@_matrix_options
@click.option("--xr", type=FloatList(2), required=True, help="v1 range lo,hi.")
@click.option("--yr", type=FloatList(2), required=True, help="v2 range lo,hi.")
@click.option("--nx", type=click.IntRange(min=2), required=True)
@click.option("--ny", type=click.IntRange(min=2), required=True)
@click.option("--times", is_flag=True, help="Fill the t_star column.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output file.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@_numeric_guard
def region(Q, model, xr, yr, nx, ny, times, out, fmt, workers):
    """Sample verdicts on a grid of initial gradients (row-major, v2 outer)."""
    grid = sample_region(_resolve_q(Q, model), xr, yr, nx, ny, want_times=times, workers=workers)
    text = grid.to_csv() if fmt == "csv" else grid.to_json()
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


@main.command()
@_matrix_options
@click.option("--V0", "V0", type=FloatList(2), required=True, help="Initial state V,E.")
@click.option("--v0", type=FloatList(2), required=True, help="Initial gradients v1,v2.")
@click.option("--x0", type=float, default=0.0, show_default=True)
@click.option("--t-max", "t_max", type=click.FloatRange(min=0, min_open=True), required=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
@_numeric_guard
def trace(Q, model, V0, v0, x0, t_max, dt, out):
    """CSV of t,x,V1,V2,v1,v2,blowup along one characteristic."""
    rows = trace_characteristic(_resolve_q(Q, model), V0, v0, x0, t_max, dt)
    lines = ["t,x,V1,V2,v1,v2,blowup"]
    for r in rows:
        vals = [format(v, ".17g") for v in (r.t, r.x, r.V1, r.V2, r.v1, r.v2)]
        lines.append(",".join(vals + [str(int(r.blowup))]))
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _compare(Q, v0, t_max: float) -> dict:
    crit = blows_up(Q, v0, want_time=True)
    orc = integrate_extended_oracle(Q, v0, t_max=t_max)
    margin = abs(decisive_function(jordanize(Q), v0).infimum()) < MARGIN
    agree = None if orc.blew_up is None else orc.blew_up == crit.blows_up
    return {
        "criterion_verdict": crit.blows_up,
        "clause": crit.clause,
        "oracle_verdict": orc.blew_up,
        "agree": agree,
        "margin": margin,
        "t_star": crit.t_star,
        "t_blow": orc.t_blow,
    }


@main.command()
@_matrix_options
@click.option("--v0", type=FloatList(2), default=None, help="Initial gradients v1,v2.")
@click.option("--t-max", "t_max", type=click.FloatRange(min=0, min_open=True), default=ORACLE_T_MAX,
              show_default=True)
@click.option("--batch", type=click.IntRange(min=1), default=None,
              help="Compare on N random instances instead of one.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@_numeric_guard
def oracle(Q, model, v0, t_max, batch, seed, workers):
    """Criterion verdict against direct integration, as JSON."""
    if batch is None:
        if v0 is None:
            raise click.UsageError("--v0 is required unless --batch is given")
        _emit_json(_compare(_resolve_q(Q, model), v0, t_max))
        return
    if Q is not None or model is not None or v0 is not None:
        raise click.UsageError("--batch draws its own instances; drop --Q/--model/--v0")
    cases = [(Matrix2.from_array(Qa), tuple(v)) for _route, Qa, v in stratified_instances(batch, seed)]

    def run(case):
        return _compare(case[0], case[1], t_max)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, cases))
    else:
        results = [run(c) for c in cases]
    counted = [r for r in results if not r["margin"] and r["agree"] is not None]
    agreed = sum(r["agree"] for r in counted)
    _emit_json({
        "n": batch,
        "seed": seed,
        "margin": sum(r["margin"] for r in results),
        "undecided": sum(r["agree"] is None and not r["margin"] for r in results),
        "decided": len(counted),
        "agreed": agreed,
        "agreement_rate": agreed / len(counted) if counted else None,
    })


if __name__ == "__main__":
    main()
