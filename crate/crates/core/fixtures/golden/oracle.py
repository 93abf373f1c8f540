"""Writes the golden one-node fixture and its expected outputs.

The expected dispatch is simulated here from first principles: storage
meets residual load first, flexible generation covers what remains, and
anything left over is unserved or spilled. Capacities and demand are chosen
so that no interval is short, every value is exactly representable, and
flexible generation alone can cover peak demand.
"""

import json
import math
from pathlib import Path

HERE = Path(__file__).parent
R = 1.0
DAYLIGHT = [0, 0, 0, 0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1, 1, 1, 1, 0.75, 0.5, 0.25, 0, 0, 0, 0, 0, 0]
AVAIL = DAYLIGHT + [a * 0.5 for a in DAYLIGHT]
DAY_MW = [1000] * 7 + [1500] * 10 + [2000] * 5 + [1000] * 2
DEMAND_MW = DAY_MW + DAY_MW

PV_NEW, BAT_P, BAT_E, GAS_NEW = 4.0, 1.5, 6.0, 2.5
ETA_CH, ETA_DIS = 1.0, 0.5
ANNUAL_GAS = 1000.0

COSTS = {
    "pv": dict(capital_power=1000.0, fixed_om=10.0, variable_om=0.0, fuel=0.0, capital_energy=0.0),
    "bat": dict(capital_power=800.0, capital_energy=200.0, fixed_om=5.0, variable_om=1.0, fuel=0.0),
    "gas": dict(capital_power=900.0, fixed_om=15.0, variable_om=5.0, fuel=90.0, capital_energy=0.0),
}
DR, LIFE = 0.05, 25.0


def fmt(x):
    x = x + 0.0
    if x == int(x):
        return str(int(x))
    return repr(x)


def simulate():
    gamma = 0.5 * BAT_E
    remaining = ANNUAL_GAS
    rows, soc = [], []
    for t, (mw, a) in enumerate(zip(DEMAND_MW, AVAIL)):
        load = mw / 1000.0
        pv = PV_NEW * a
        rl = load - pv
        dis = min(BAT_P, gamma * ETA_DIS / R)
        ch = min(BAT_P, (BAT_E - gamma) / (ETA_CH * R))
        if rl > 0:
            sto = min(rl, dis)
        elif rl < 0:
            sto = -min(-rl, ch)
        else:
            sto = 0.0
        nl = rl - sto
        flex = min(max(nl, 0.0), GAS_NEW, remaining / R)
        nl -= flex
        unserved, spill = max(nl, 0.0), max(-nl, 0.0)
        gamma -= R * (max(sto, 0.0) / ETA_DIS + ETA_CH * min(sto, 0.0))
        remaining -= flex * R
        rows.append([t, load, pv, 0.0, 0.0, 0.0, 0.0, unserved, spill, sto, flex])
        soc.append([t, gamma])
    return rows, soc


def crf(dr, y):
    return dr / (1 - (1 + dr) ** -y)


def main():
    config = {
        "nodes": ["A"],
        "generators": [
            {"id": "pv", "node": "A", "kind": "pv", "new_power": {"min": 0, "max": 8}, "costs": COSTS["pv"]},
            {"id": "gas", "node": "A", "kind": "flexible", "annual_energy": ANNUAL_GAS,
             "new_power": {"min": 0, "max": 4}, "costs": COSTS["gas"]},
        ],
        "storages": [
            {"id": "bat", "node": "A", "charge_efficiency": ETA_CH, "discharge_efficiency": ETA_DIS,
             "new_power": {"min": 0, "max": 4}, "new_energy": {"min": 0, "max": 16}, "costs": COSTS["bat"]},
        ],
        "defaults": {"discount_rate": DR, "lifetime": LIFE},
        "horizon": {"resolution": R},
        "reliability": {"standard": 0.99998},
    }
    (HERE / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    (HERE / "demand.csv").write_text("A\n" + "".join(f"{v}\n" for v in DEMAND_MW))
    (HERE / "availability.csv").write_text("pv\n" + "".join(f"{fmt(v)}\n" for v in AVAIL))
    candidate = {"pv.power": PV_NEW, "gas.power": GAS_NEW, "bat.power": BAT_P, "bat.energy": BAT_E}
    (HERE / "candidate.json").write_text(json.dumps(candidate, indent=2) + "\n")

    rows, soc = simulate()
    header = "interval,A.demand,A.pv,A.wind,A.baseload,A.imports,A.exports,A.unserved,A.spillage,bat.power,gas.power"
    lines = [header] + [",".join([str(r[0])] + [fmt(v) for v in r[1:]]) for r in rows]
    (HERE / "expected" / "dispatch.csv").write_text("\n".join(lines) + "\n")
    lines = ["interval,bat"] + [f"{t},{fmt(g)}" for t, g in soc]
    (HERE / "expected" / "soc.csv").write_text("\n".join(lines) + "\n")

    f = crf(DR, LIFE)
    fixed = 1e6 * (
        COSTS["pv"]["capital_power"] * PV_NEW * f + COSTS["pv"]["fixed_om"] * PV_NEW
        + COSTS["gas"]["capital_power"] * GAS_NEW * f + COSTS["gas"]["fixed_om"] * GAS_NEW
        + (COSTS["bat"]["capital_power"] * BAT_P + COSTS["bat"]["capital_energy"] * BAT_E) * f
        + COSTS["bat"]["fixed_om"] * BAT_P
    )
    gas_mwh = sum(r[10] for r in rows) * R * 1000
    bat_mwh = sum(max(r[9], 0.0) for r in rows) * R * 1000
    variable = gas_mwh * (COSTS["gas"]["variable_om"] + COSTS["gas"]["fuel"]) + bat_mwh * COSTS["bat"]["variable_om"]
    demand_mwh = sum(DEMAND_MW) * R
    summary = {
        "fixed": fixed,
        "variable": variable,
        "demand_mwh": demand_mwh,
        "system_cost": (fixed + variable) / demand_mwh,
        "unserved_gwh": sum(r[7] for r in rows) * R,
    }
    assert math.isclose(summary["unserved_gwh"], 0.0)
    (HERE / "expected" / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")


if __name__ == "__main__":
    main()
