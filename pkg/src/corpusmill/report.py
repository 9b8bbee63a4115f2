"""Run-report rendering: delimited summaries plus matplotlib figures.

The stats command writes a TSV summary next to PNG charts so a run can
be inspected without re-parsing JSON: drop reasons, verdict statuses,
language mix for the trace pipeline, and per-round growth for the
adversarial loop.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_BAR_KW = {"color": "#4878a8", "edgecolor": "black", "linewidth": 0.6}


def _bar_chart(counts: dict[str, int], title: str, ylabel: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    labels = list(counts)
    values = [counts[k] for k in labels]
    ax.bar(range(len(labels)), values, **_BAR_KW)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trace_figures(stats: dict, outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    panels = [
        ("drops", "Drop reasons", "records"),
        ("statuses", "Execution verdicts", "records"),
        ("languages", "Corpus languages", "records"),
    ]
    for key, title, ylabel in panels:
        counts = stats.get(key) or {}
        if not counts:
            continue
        path = outdir / f"trace_{key}.png"
        _bar_chart(counts, title, ylabel, path)
        written.append(path)
    funnel = {
        "ingested": stats.get("ingested", 0),
        "annotated": stats.get("annotated", 0),
        "dropped": sum((stats.get("drops") or {}).values()),
        "errored": stats.get("errored", 0),
    }
    path = outdir / "trace_funnel.png"
    _bar_chart(funnel, "Pipeline funnel", "records", path)
    written.append(path)
    return written


def render_advgen_figures(rows: list[dict], outdir: Path) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    rounds = [r["round"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(rounds, [r["pool_size"] for r in rows], marker="o", color="#4878a8")
    ax1.set_xlabel("round")
    ax1.set_ylabel("pool size")
    ax1.set_title("Seed pool growth")
    width = 0.18
    for offset, key in enumerate(("accepted", "rejected", "invalid", "parse_failed")):
        xs = [r + (offset - 1.5) * width for r in rounds]
        ax2.bar(xs, [row.get(key, 0) for row in rows], width=width, label=key)
    ax2.set_xlabel("round")
    ax2.set_ylabel("candidates")
    ax2.set_title("Per-round outcomes")
    ax2.legend(fontsize=7)
    fig.tight_layout()
    path = outdir / "advgen_rounds.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def write_summary_tsv(
    trace_stats: dict | None, advgen_rows: list[dict] | None, path: Path
) -> None:
    """Flat key<TAB>value lines; round rows become round.N.field keys."""
    lines = []
    if trace_stats:
        for key in ("ingested", "annotated", "errored"):
            lines.append(f"trace.{key}\t{trace_stats.get(key, 0)}")
        for section in ("drops", "statuses", "languages"):
            for name, count in sorted((trace_stats.get(section) or {}).items()):
                lines.append(f"trace.{section}.{name}\t{count}")
    if advgen_rows:
        for row in advgen_rows:
            for key in (
                "generated",
                "parse_failed",
                "invalid",
                "rejected",
                "undecided",
                "accepted",
                "deduped",
                "pool_size",
            ):
                lines.append(f"advgen.round.{row['round']}.{key}\t{row.get(key, 0)}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
