# Decay scans over Gibbs chains and Lindblad models, written as CSV and plot-ready data

import logging
import os
from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from models.hamiltonians import gibbs_state, ising_chain, pauli_string_matrix, transverse_field_ising
from utils.config import Config
from utils.exceptions import BadName, ParseFailure, WriteFailure

from .channels import KrausInstrument, apply_instrument
from .correlators import operator_correlation
from .info import conditional_mutual_information
from .lindblad import convergence_check, davies_generator, detectability_scan
from .stability import ChainGeometry, buffer_partition, default_split, src_profile, stability_score

logger = logging.getLogger(__name__)

HAMILTONIANS = {
    "ising": lambda n: ising_chain(n),
    "tfim": lambda n: transverse_field_ising(n),
}

GIBBS_COLUMNS = ["model", "beta", "r", "corr", "cmi", "eta", "zeta"]
STABILITY_COLUMNS = ["model", "beta", "r", "r1", "r2", "traj_error", "chan_error", "corr", "cmi"]
LINDBLAD_COLUMNS = ["model", "beta", "t", "error", "gap", "bound"]


def parse_range(text: str) -> List[float]:
    """
    Parse "start:stop:step" (stop included) or a comma-separated list

    Args:
        text: Range text such as "0.1:2.0:0.1"

    Returns:
        List[float]: Values in order
    """
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + k * step, 12) for k in range(max(count, 0))]
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ParseFailure(f"cannot parse range {text!r}: {e}")


def hamiltonian(model: str, n: int):
    if model not in HAMILTONIANS:
        raise BadName(f"unknown model {model!r}; choose from {sorted(HAMILTONIANS)}")
    return HAMILTONIANS[model](n)


def z_measurement(register, site: int) -> KrausInstrument:
    """Projective Z measurement on one site"""
    d = register.dims_of((site,))[0]
    projectors = []
    for k in range(d):
        P = np.zeros((d, d), dtype=complex)
        P[k, k] = 1.0
        projectors.append(P)
    return KrausInstrument(register.region((site,)), tuple(projectors))


# -- Gibbs profiles -----------------------------------------------------------------


def gibbs_scan(betas: Iterable[float], n: int = 8, model: str = "ising",
               restarts: int = 4, seed: Optional[int] = None) -> pd.DataFrame:
    """
    Correlation and CMI profiles of Gibbs chains with their fitted lengths

    Args:
        betas: Inverse temperatures
        n: Chain length
        model: "ising" or "tfim"
        restarts: Restarts of the correlation-norm ascent
        seed: Seed for the ascent

    Returns:
        pd.DataFrame: One row per (beta, r) with eta and zeta repeated per beta
    """
    H = hamiltonian(model, n)
    rows = []
    for beta in betas:
        profile = src_profile(gibbs_state(H, float(beta)), ChainGeometry(), restarts=restarts, seed=seed)
        for r, corr, cmi in profile.samples:
            rows.append({"model": model, "beta": float(beta), "r": r, "corr": corr, "cmi": cmi,
                         "eta": profile.eta, "zeta": profile.zeta})
        logger.info("gibbs %s beta=%.3f: eta=%.4f zeta=%.4f", model, beta, profile.eta, profile.zeta)
    return pd.DataFrame(rows, columns=GIBBS_COLUMNS)


def fitted_lengths(table: pd.DataFrame) -> pd.DataFrame:
    """(beta, eta, zeta) per beta of a gibbs scan"""
    if table.empty:
        return pd.DataFrame(columns=["beta", "eta", "zeta"])
    return table.groupby("beta", as_index=False)[["eta", "zeta"]].first()


# -- stability ------------------------------------------------------------------------


def stability_scan(radii: Sequence[int], n: int = 6, beta: float = 0.3, model: str = "tfim",
                   site: int = 0, seed: Optional[int] = None) -> pd.DataFrame:
    """
    Trajectory and channel recovery errors of a Z measurement against buffer radius

    Args:
        radii: Buffer radii r (split with the default r1 = ceil(r / 2))
        n: Chain length
        beta: Inverse temperature
        model: "ising" or "tfim"
        site: Measured site
        seed: Seed for the correlation ascent

    Returns:
        pd.DataFrame: One row per radius with STABILITY_COLUMNS
    """
    rho = gibbs_state(hamiltonian(model, n), beta)
    register = rho.register
    inst = z_measurement(register, site)
    rows = []
    for r in radii:
        r1, r2 = default_split(int(r))
        part = buffer_partition(register, (site,), r1, r2)
        if part["C"].is_empty:
            logger.warning("radius %d leaves no region C on %d sites; skipped", r, n)
            continue
        report = stability_score(rho, inst, part)
        A, C = part["A"], part["C"]
        corr = operator_correlation(rho, A, C, restarts=4, seed=seed).value
        cmi = conditional_mutual_information(rho, A, C, part.union("B1", "B2"))
        rows.append({"model": model, "beta": beta, "r": int(r), "r1": r1, "r2": r2,
                     "traj_error": report.trajectory_error, "chan_error": report.channel_error,
                     "corr": corr, "cmi": cmi})
    return pd.DataFrame(rows, columns=STABILITY_COLUMNS)


# -- Lindblad -------------------------------------------------------------------------


def davies_chain(n: int = 3, beta: float = 1.0, model: str = "ising"):
    """Davies model of a chain with an X coupling on every site"""
    H = hamiltonian(model, n)
    X = pauli_string_matrix("X")
    return davies_generator(H, [((x,), X) for x in H.register.labels], beta)


def lindblad_scan(t_grid: Sequence[float], n: int = 3, beta: float = 1.0,
                  model: str = "ising", site: int = 0) -> pd.DataFrame:
    """
    Relaxation of a measured Gibbs trajectory under the Davies model

    Args:
        t_grid: Times
        n: Chain length
        beta: Inverse temperature
        model: "ising" or "tfim"
        site: Site of the Z measurement producing the initial state

    Returns:
        pd.DataFrame: (t, error, gap, bound) rows
    """
    davies = davies_chain(n, beta, model)
    ensemble = apply_instrument(davies.reference, z_measurement(davies.register, site))
    report = convergence_check(davies, ensemble.states[0], t_grid)
    rows = [{"model": davies.name, "beta": beta, "t": t, "error": e, "gap": report.gap, "bound": b}
            for t, e, b in zip(report.times, report.errors, report.envelope)]
    return pd.DataFrame(rows, columns=LINDBLAD_COLUMNS)


def detectability_table(depths: Sequence[int], n: int = 3, beta: float = 1.0,
                        site: int = 0) -> pd.DataFrame:
    davies = davies_chain(n, beta, "ising")
    errors, fit = detectability_scan(davies, (site,), z_measurement(davies.register, site), depths)
    return pd.DataFrame({"model": davies.name, "beta": beta, "m": list(depths), "error": list(errors),
                         "slope": fit.slope})


# -- output ---------------------------------------------------------------------------


def write_scan(table: pd.DataFrame, path: str) -> str:
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        table.to_csv(path, index=False)
    except OSError as e:
        raise WriteFailure(f"could not write {path}: {e}")
    logger.info("wrote %d rows to %s", len(table), path)
    return path


def _plot_columns(table: pd.DataFrame) -> pd.DataFrame:
    floor = Config.FIT_FLOOR
    if "traj_error" in table.columns:
        return pd.DataFrame({"r": table["r"], "log_error": np.log(np.maximum(table["traj_error"], floor))})
    if "t" in table.columns and "error" in table.columns:
        return pd.DataFrame({"t": table["t"],
                             "log_error": np.log(np.maximum(table["error"], floor)),
                             "bound": table["bound"]})
    return table.select_dtypes(include="number")


def plot_data(csv_path: str, out_path: str) -> str:
    """
    Gnuplot-ready columns from a scan CSV

    Stability scans give (r, log error), Lindblad scans (t, log error, bound);
    other tables pass their numeric columns through. An empty CSV gives the
    header block only.

    Args:
        csv_path: Scan CSV
        out_path: Data file to write

    Returns:
        str: out_path
    """
    try:
        table = pd.read_csv(csv_path)
    except pd.errors.EmptyDataError:
        table = pd.DataFrame()
    except (OSError, pd.errors.ParserError) as e:
        raise ParseFailure(f"cannot read {csv_path}: {e}")

    data = _plot_columns(table) if not table.empty else table
    lines = [f"# source: {os.path.basename(csv_path)}",
             "# " + " ".join(str(c) for c in data.columns)]
    for row in data.itertuples(index=False):
        lines.append(" ".join(f"{v:.12g}" if isinstance(v, (float, np.floating)) else str(v) for v in row))
    try:
        with open(out_path, "w") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        raise WriteFailure(f"could not write {out_path}: {e}")
    return out_path
