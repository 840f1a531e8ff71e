"""
SVG plots of result tables
"""
from pathlib import Path
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from core.logger import get_logger

logger = get_logger('plotting')

# fixed ids and no date keep reruns byte-identical
plt.rcParams['svg.hashsalt'] = 'collapse-sim'
SVG_METADATA = {'Date': None}


def _save(fig, out_path: Path) -> Path:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(out_path, format='svg', metadata=SVG_METADATA)
    plt.close(fig)
    logger.info(f"Plot written: {out_path}")
    return out_path


def plot_deviation(df: pd.DataFrame, out_path: Path) -> Path:
    """P against lambdaT per a2: Monte Carlo with error bars, series as lines"""
    fig, ax = plt.subplots()
    for a2, group in df.sort_values('lambdaT').groupby('a2'):
        line = ax.errorbar(group['lambdaT'], group['p_hat'], yerr=3 * group['std_error'],
                           fmt='o', ms=4, capsize=2, label=f"MC a2={a2:g}")
        ax.plot(group['lambdaT'], group['P_series'], '-', color=line[0].get_color(), lw=1)
    ax.set_xlabel(r'$\lambda T$')
    ax.set_ylabel('P(peak 1 dominates)')
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, out_path)


def plot_series(df: pd.DataFrame, out_path: Path) -> Path:
    """Series and quadrature totals against lambdaT per a2"""
    fig, ax = plt.subplots()
    for a2, group in df.sort_values('lambdaT').groupby('a2'):
        line, = ax.plot(group['lambdaT'], group['P_series'], '-', label=f"series a2={a2:g}")
        ax.plot(group['lambdaT'], group['P_quadrature'], 'x', color=line.get_color())
    ax.set_xlabel(r'$\lambda T$')
    ax.set_ylabel('P')
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, out_path)


def plot_kg(df: pd.DataFrame, out_path: Path) -> Path:
    """|psi| heat map over (z, t)"""
    fig, ax = plt.subplots()
    mesh = ax.tripcolor(df['z'].to_numpy(), df['t'].to_numpy(), df['abs_psi'].to_numpy(), shading='gouraud')
    fig.colorbar(mesh, ax=ax, label=r'$|\psi|$')
    ax.set_xlabel('z')
    ax.set_ylabel('t')
    return _save(fig, out_path)


def plot_detectability(df: pd.DataFrame, out_path: Path) -> Path:
    """Born deviation against lambdaT; flagged apparatus highlighted"""
    fig, ax = plt.subplots()
    ok = df[df['regime_ok'].astype(bool)]
    flagged = ok['flagged'].astype(bool)
    ax.loglog(ok.loc[~flagged, 'lambdaT'], np.abs(ok.loc[~flagged, 'deviation']), 'o', label='below threshold')
    ax.loglog(ok.loc[flagged, 'lambdaT'], np.abs(ok.loc[flagged, 'deviation']), 's', label='detectable')
    ax.set_xlabel(r'$\lambda T$')
    ax.set_ylabel('|P - a2|')
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, out_path)


PLOTTERS = {
    'deviation': plot_deviation,
    'series': plot_series,
    'kg': plot_kg,
    'detectability': plot_detectability,
}


def plot_csv(csv_path: Path, kind: str, out_path: Path) -> Path:
    """Plot a validated result CSV"""
    return PLOTTERS[kind](pd.read_csv(csv_path), out_path)
