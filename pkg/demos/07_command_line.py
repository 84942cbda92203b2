"""
The command-line interface
==========================

The same pipelines are available as ``seqpeps`` subcommands. Here they
are called through ``dispatch`` so the script runs without a shell.
"""

import tempfile
from pathlib import Path

from seqpeps.cli import dispatch

out = Path(tempfile.mkdtemp())

# depth of a 50x50 radial circuit against the formula
dispatch(["schedule", "--family", "rp-peps", "--size", "50x50", "--lp", "2"])

# write a circuit, convert it to a network and check the inclusion chain
dispatch(["gen", "--family", "isotns", "--size", "3x3", "--seed", "2", "--out", str(out / "iso.json")])
dispatch(["convert", "--circuit", str(out / "iso.json"), "--out", str(out / "iso_net")])
code = dispatch(["--manifest", str(out / "manifest.json"), "verify", "--inclusion", "sgs-isotns", "--size", "3x3", "--seed", "7"])
print("exit code", code)
print((out / "manifest.json").read_text())

# plot-ready tables
dispatch(["report", "--out", str(out / "report")])
print(sorted(p.name for p in (out / "report").iterdir()))
