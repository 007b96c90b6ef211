"""
Reproducible sweeps to CSV and SVG
==================================

Run the transmit-power sweep at desk scale, write the CSV and a line plot,
and run the validation suite. The same is available from the command line
as ``ddcmimo sweep --figure tx-power --preset desk --out tx.csv --plot tx.svg``.
"""

import tempfile
from pathlib import Path

from ddcmimo.experiments import emit_plot, format_report, load_config, run_sweep, validate, write_csv

config = load_config(preset="desk")
result = run_sweep("tx-power", config)
for row in result.aggregate():
    print(f"P_T={row.sweep_value:7g}  capa {row.rx_power_db_capa:8.2f} dB  "
          f"conventional {row.rx_power_db_conventional:8.2f} dB  equal {row.rx_power_db_equal_alloc:8.2f} dB")

out = Path(tempfile.mkdtemp())
write_csv(result, out / "tx-power.csv")
emit_plot(result, out / "tx-power.svg")
print("wrote", sorted(p.name for p in out.iterdir()))

# %%
print(format_report(validate(config)))
