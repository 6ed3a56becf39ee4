"""brushwork command line: train, attribute, sweep, synth, eval, tiles.

Exit codes are a stable scripting contract:
    0  success
    2  usage / flag validation error
    3  data or I/O error
    4  numeric divergence (non-finite loss during training)

Every output file is written to a temporary name and renamed on success,
so a failed run never leaves partial artifacts.  BRUSHWORK_THREADS, when
set, caps the linear-algebra thread pools (it must take effect before
numpy loads, hence the environment setup below).
"""

import os
import sys

if os.environ.get("BRUSHWORK_THREADS"):
    _n = os.environ["BRUSHWORK_THREADS"]
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _n)

import click

from . import attribution, experiment, imageio, nnet, tiling
from . import synth as synth_corpus
from ._util import atomic_write_text
from .errors import BrushworkError, NonFiniteLossError

_EXIT_DATA = 3
_EXIT_NUMERIC = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map pipeline failures onto the exit-code contract."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NonFiniteLossError as exc:
            _fail(_EXIT_NUMERIC, str(exc))
        except (BrushworkError, FileNotFoundError) as exc:
            _fail(_EXIT_DATA, str(exc))
        except OSError as exc:
            _fail(_EXIT_DATA, str(exc))
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _parse_sizes(_ctx, _param, value: str) -> list[int]:
    try:
        sizes = [int(tok) for tok in value.split(",") if tok.strip()]
    except ValueError:
        raise click.BadParameter(f"sizes must be comma-separated integers, "
                                 f"got {value!r}")
    if len(sizes) < 2:
        raise click.BadParameter("a sweep needs at least 2 tile sizes")
    if len(set(sizes)) != len(sizes):
        raise click.BadParameter("duplicate tile sizes")
    if any(s < 1 for s in sizes):
        raise click.BadParameter("tile sizes must be >= 1")
    return sizes


def _positive_int(name):
    def check(_ctx, _param, value):
        if value is not None and value < 1:
            raise click.BadParameter(f"{name} must be >= 1")
        return value
    return check


def _nonneg_float(name):
    def check(_ctx, _param, value):
        if value is not None and value < 0:
            raise click.BadParameter(f"{name} must be >= 0")
        return value
    return check


@click.group()
@click.option("--seed", type=int, default=42, show_default=True,
              help="Master seed for anything randomized.")
@click.option("--quiet", is_flag=True, help="Suppress progress notes.")
@click.pass_context
def main(ctx, seed, quiet):
    """Tile-based painting attribution pipeline."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["quiet"] = quiet


def _note(ctx, message):
    if not ctx.obj.get("quiet"):
        click.echo(message, err=True)


def _train_cfg(epochs, lr, batch, seed, optimizer="adam"):
    try:
        cfg = nnet.TrainConfig(epochs=epochs, learning_rate=lr,
                               batch_size=batch, seed=seed,
                               optimizer=optimizer)
        cfg.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    return cfg


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--tile-size", required=True, type=int,
              callback=_positive_int("--tile-size"))
@click.option("--stride", type=int, default=None,
              callback=_positive_int("--stride"),
              help="Default: half the tile size.")
@click.option("--tau", type=float, default=1.0, show_default=True,
              callback=_nonneg_float("--tau"),
              help="Salience threshold as a fraction of image entropy.")
@click.option("--epochs", type=int, default=10, show_default=True,
              callback=_positive_int("--epochs"))
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch", type=int, default=32, show_default=True,
              callback=_positive_int("--batch"))
@click.option("--optimizer", type=click.Choice(["adam", "sgd"]),
              default="adam", show_default=True)
@click.option("--out", required=True, type=click.Path(),
              help="Model file to write.")
@click.pass_context
@_guarded
def train(ctx, manifest, tile_size, stride, tau, epochs, lr, batch,
          optimizer, out):
    """Train a tile classifier from a labeled manifest.

    Prints one `epoch,mean_loss` line per epoch to standard output.
    """
    seed = ctx.obj["seed"]
    cfg = _train_cfg(epochs, lr, batch, seed, optimizer)
    stride = stride or max(1, tile_size // 2)
    data = imageio.load_manifest(manifest)
    tiles, labels, skipped = experiment.collect_training_tiles(
        data, tile_size, stride, tau)
    if skipped:
        _note(ctx, f"{skipped} image(s) had no salient tile and were skipped")
    _note(ctx, f"training on {len(labels)} tiles at size {tile_size}")
    model = nnet.init_model(nnet.Architecture(), seed, tile_size=tile_size)
    model.meta.tau = tau
    trained, _ = nnet.train(model, tiles, labels, cfg,
                            on_epoch=lambda e, loss: click.echo(f"{e},{loss!r}"))
    nnet.save_model(trained, out)
    _note(ctx, f"model written to {out}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--heatmap", "heatmap_path", type=click.Path(), default=None,
              help="Also write a per-tile contribution heatmap PNG.")
@click.option("--uncovered-csv", type=click.Path(), default=None,
              help="With --heatmap: list uncovered pixels as x,y CSV.")
@click.option("--stride", type=int, default=None,
              callback=_positive_int("--stride"))
@click.option("--tau", type=float, default=1.0, show_default=True,
              callback=_nonneg_float("--tau"))
@click.option("--fallback-top1", is_flag=True,
              help="Score the single busiest tile if none meets tau.")
@click.pass_context
@_guarded
def attribute(ctx, model_path, image_path, report_path, heatmap_path,
              uncovered_csv, stride, tau, fallback_top1):
    """Score an image and write the attribution report JSON."""
    model = nnet.load_model(model_path)
    img = imageio.load_image(image_path)
    report = attribution.attribute(model, img, image_path=image_path,
                                   stride=stride, tau=tau,
                                   fallback_top1=fallback_top1)
    attribution.save_report(report, report_path)
    if heatmap_path:
        cmap = attribution.contribution_map(
            report.tile_scores, report.tile_size, img.width, img.height)
        attribution.save_heatmap(cmap, heatmap_path, uncovered_csv)
    _note(ctx, f"aggregate {report.aggregate:.6f} -> {report.verdict}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--sizes", required=True, callback=_parse_sizes,
              help="Comma-separated tile sizes, e.g. 16,32,64,128.")
@click.option("--epochs", type=int, default=10, show_default=True,
              callback=_positive_int("--epochs"))
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch", type=int, default=32, show_default=True,
              callback=_positive_int("--batch"))
@click.option("--tau", type=float, default=1.0, show_default=True,
              callback=_nonneg_float("--tau"))
@click.option("--fraction", type=float, default=0.25, show_default=True,
              help="Held-out test share of each label.")
@click.option("--out", required=True, type=click.Path(),
              help="Sweep CSV to write.")
@click.option("--plot", type=click.Path(), default=None,
              help="Optional accuracy-vs-size chart PNG.")
@click.pass_context
@_guarded
def sweep(ctx, manifest, sizes, epochs, lr, batch, tau, fraction, out, plot):
    """Train and evaluate one model per tile size; write the accuracy table."""
    if not 0.0 < fraction < 1.0:
        raise click.UsageError("--fraction must be in (0, 1)")
    seed = ctx.obj["seed"]
    cfg = _train_cfg(epochs, lr, batch, seed)
    data = imageio.load_manifest(manifest)
    result = experiment.run_sweep(
        data, sizes, cfg, seed, tau=tau, fraction=fraction,
        progress=None if ctx.obj.get("quiet") else
        (lambda msg: click.echo(msg, err=True)))
    experiment.save_sweep_csv(result, out)
    if plot:
        try:
            experiment.save_sweep_plot(result, plot)
        except ImportError:
            click.echo("warning: matplotlib not installed, skipping --plot "
                       "(the CSV is the contract)", err=True)
    _note(ctx, f"sweep table written to {out}")


@main.command()
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--canvas", type=int, default=512, show_default=True)
@click.option("--count", type=int, default=8, show_default=True,
              help="Images per class.")
@click.option("--signal-scale", type=int, default=64, show_default=True,
              help="Spatial scale carrying the class signature.")
@click.pass_context
@_guarded
def synth(ctx, out_dir, canvas, count, signal_scale):
    """Generate a synthetic two-class corpus with a known signal scale."""
    spec = synth_corpus.SynthSpec(canvas=canvas, count_per_class=count,
                                  signal_scale=signal_scale,
                                  seed=ctx.obj["seed"])
    try:
        spec.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))
    manifest = synth_corpus.gen_synth(spec, out_dir)
    _note(ctx, f"{len(manifest.entries)} images + manifest.csv in {out_dir}")


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--manifest", required=True, type=click.Path())
@click.option("--stride", type=int, default=None,
              callback=_positive_int("--stride"))
@click.option("--tau", type=float, default=1.0, show_default=True,
              callback=_nonneg_float("--tau"))
@_guarded
def eval_cmd(model_path, manifest, stride, tau):
    """Evaluate a model over a labeled manifest; metrics JSON to stdout."""
    import json

    model = nnet.load_model(model_path)
    data = imageio.load_manifest(manifest)
    metrics = experiment.evaluate(model, data, stride=stride, tau=tau)
    click.echo(json.dumps(metrics.to_dict(), indent=2))


@main.command()
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--tile-size", required=True, type=int,
              callback=_positive_int("--tile-size"))
@click.option("--stride", type=int, default=None,
              callback=_positive_int("--stride"))
@click.option("--tau", type=float, default=1.0, show_default=True,
              callback=_nonneg_float("--tau"))
@click.option("--out", required=True, type=click.Path(),
              help="Diagnostics CSV to write.")
@click.pass_context
@_guarded
def tiles(ctx, image_path, tile_size, stride, tau, out):
    """Dump per-tile entropy and selection flags for one image."""
    img = imageio.load_image(image_path)
    stride = stride or max(1, tile_size // 2)
    grid = tiling.extract_tiles(img, tile_size, stride)
    whole = tiling.image_entropy(imageio.to_grayscale(img))
    threshold = tau * whole
    lines = ["col,row,origin_x,origin_y,entropy,selected"]
    for t in grid.tiles:
        selected = "true" if t.entropy >= threshold else "false"
        lines.append(f"{t.grid_col},{t.grid_row},{t.origin_x},{t.origin_y},"
                     f"{t.entropy!r},{selected}")
    atomic_write_text(out, "\n".join(lines) + "\n")
    _note(ctx, f"{len(grid.tiles)} tiles written to {out} "
               f"(image entropy {whole!r})")


if __name__ == "__main__":
    main()
