"""
The four applications in three modes
====================================

Same data, same answers; only the number of map tasks and the bytes moved
change between baseline, spliter and rechunk.
"""
from spliterkit.apps import APPS, MODES, AppConfig, run_app

for app in APPS:
    for mode in MODES:
        cfg = AppConfig(app=app, mode=mode, workers=2, blocks_per_worker=16,
                        rows_per_worker=2048, dims=2 if app == "csvm" else 3, iters=5)
        run = run_app(cfg)
        m = run.metrics
        print(f"{app:9s} {mode:8s} map_tasks={run.info['map_tasks']:3d} "
              f"total={m.tasks_submitted:4d} moved={m.bytes_transferred}")

##############################################################################
# kNN also reports how many distance evaluations the trees needed.
# Fewer, larger trees prune better.

for mode in MODES:
    run = run_app(AppConfig(app="knn", mode=mode, blocks_per_worker=16))
    print(mode, run.info["trees"], "trees,", run.info["distance_evals"], "evaluations")
