import sys

for line in sys.stdin:
    x, y = map(float, line.split())
    print(-((x - 0.25) ** 2) - (y + 0.5) ** 2, flush=True)
