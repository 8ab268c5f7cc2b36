"""Capture service responses for the explorer's fixture-backed tests.

Run from this directory with the Python package installed:

    python3 capture.py
"""
import json, pathlib, tempfile
from fastapi.testclient import TestClient
from cead.data import find_scenario
from cead.harness import run_scenario
from cead.service import create_app

work = pathlib.Path(tempfile.mkdtemp(prefix="fixture-"))
bundle = work / "bundle"
scenario = find_scenario("synth-digits", "seven")
run_scenario(
    scenario, "bce", seed=0, scale="smoke", out_dir=bundle,
    cache_dir=work / "glyphs",
    dataset_options={"n_train_per_class": 40, "n_test_per_class": 12},
)
client = TestClient(create_app(bundle.parent))

scenarios = client.get("/api/v1/scenarios").json()
anomalies = client.get("/api/v1/anomalies", params={"top": 8}).json()
top_id = anomalies["items"][0]["id"]
queries = []
for alpha, k in ((1.0, 0), (0.0, 0), (0.0, 1)):
    request = {"id": top_id, "alpha": alpha, "k": k}
    response = client.post("/api/v1/whatif", json=request)
    assert response.status_code == 200, response.text
    queries.append({"request": request, "response": response.json()})
report = client.get("/api/v1/report").json()

empty_root = work / "empty"
empty_root.mkdir()
empty_client = TestClient(create_app(empty_root))
empty = empty_client.get("/api/v1/anomalies", params={"top": 8}).json()

out = pathlib.Path(__file__).resolve().parent / "interaction.json"
out.write_text(json.dumps({
    "scenarios": scenarios,
    "anomalies": anomalies,
    "whatif": queries,
    "report": report,
    "empty_anomalies": empty,
}, indent=2, sort_keys=True) + "\n")
print("wrote", out, out.stat().st_size, "bytes; top id", top_id)
