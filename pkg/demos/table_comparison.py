"""Compare the published human and software lap averages and print the relative differences.

Run: python3 demos/table_comparison.py
"""

from lapbench.compare import compare, render
from lapbench.fixtures import PUBLISHED_REL_DIFF, human_report, software_report

result = compare(human_report(), software_report())
print(render(result, "text").decode())

print("computed vs printed relative difference (percent)")
for name, printed in PUBLISHED_REL_DIFF.items():
    print(f"  {name:<20} {result.rel_diff[name]:+8.2f}  {printed:+5d}")
