"""Walk the warm-restart learning-rate schedule over 128 epochs.

With t0=1 and t_mult=2, cycles double in length: restarts land on
epochs 0, 1, 3, 7, 15, 31, 63, 127. The first epoch of a cycle always
trains at exactly lr0; the rate then follows a half cosine toward 0 but
never reaches it because the next restart lands first.
"""

from seqaug.schedule import CosineRestarts

sched = CosineRestarts(lr0=0.01, t0=1, t_mult=2)
horizon = 128

print("restart epochs:", sched.restart_epochs(horizon))
print("cycle ends:    ", sched.cycle_end_epochs(horizon))

print("\nepoch  cycle  within/len   lr")
marks = set(sched.restart_epochs(horizon)) | {e - 1 for e in sched.cycle_end_epochs(horizon)}
for epoch in sorted(marks | {32, 64, 100}):
    cycle, within, length = sched.cycle_of(epoch)
    tag = "restart" if within == 0 else ("last of cycle" if within == length - 1 else "")
    print(f"{epoch:5d}  {cycle:5d}  {within:4d}/{length:<5d}  {sched.epoch_lr(epoch):.6f}  {tag}")

assert all(sched.epoch_lr(e) == 0.01 for e in sched.restart_epochs(horizon))
assert all(sched.lr_at(1.0, c) == 0.0 for c in range(8))
print("\nexact anchors verified: lr0 at every restart, 0 at fraction 1")
