"""GHZ chain minus the best classical chain, as a function of n.

The GHZ protocol needs odd n; even n rows evaluate its formula anyway and are
flagged.  Output is plain CSV for plotting elsewhere.
"""

import csv
import sys

from mqrac.cli import diff_rows

rows = diff_rows(20)
writer = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
writer.writeheader()
writer.writerows(rows)

best = max(rows, key=lambda r: r["diff"])
print(f"# largest gap {best['diff']:.4f} at n = {best['n']}", file=sys.stderr)
