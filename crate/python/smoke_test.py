"""Smoke test for the privgov Python module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/privgov-*.whl
"""

import tempfile
from pathlib import Path

import privgov


def main():
    assert privgov.mask_value("ABCDEFGH", 0.5) == "****EFGH"
    token = privgov.pseudonymize("CUST00001", "k")
    assert token.startswith("pid_") and token == privgov.pseudonymize("CUST00001", "k")
    assert privgov.decrypt(privgov.encrypt("secret", "k"), "k") == "secret"
    assert privgov.oracle_trust("personal", "organizational") == "Moderate"
    assert privgov.oracle_trust("organizational", "external") == "Moderate"
    assert privgov.oracle_trust("personal", "external") == "Low"
    assert privgov.select_strategy("High", "Low")[0] == "Raw"
    assert privgov.select_strategy("Low", "High")[1:] == ("pseudonymize", "mask_full", "mask_full")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        privgov.write_synthetic_finance(tmp / "data", rows=40)
        engine = privgov.Engine(key="smoke")
        ids = engine.ingest_dir(tmp / "data")
        assert ids == ["Finance_Banking_Adult_FinanceBanking.csv"], ids
        meta = engine.metadata(ids[0])
        assert meta["domain"] == "Finance & Banking"

        ev = engine.evaluate_text(privgov.FINANCE_REQUEST)
        assert (ev.trust, ev.sensitivity, ev.strategy) == ("Moderate", "High", "PartialMask")
        assert 0.4 <= ev.score <= 0.6
        assert len(ev.rows) == 40 and ev.columns == ["annual_income", "loan_status", "monthly_expenditure"]
        assert "Anonymisation Score" in ev.report()
        assert engine.verify(ev) == "PASS"
        paths = ev.write_outputs(tmp / "out")
        assert all(Path(p).exists() for p in paths)

        assert engine.trust_for("a@gmail.com", "marketing") == "Low"
        engine.ingest_text("Agriculture_Farmer_Crops.csv", "crop,yield\nWheat,3.5\n")
        raw = engine.evaluate("a@agri.org", "Organisational Use", ["crop"], "Agriculture_Farmer_Crops.csv")
        assert raw.strategy == "Raw" and raw.score == 0.0

        try:
            engine.evaluate("nobody", "x", ["crop"], "Agriculture_Farmer_Crops.csv")
        except privgov.StageError as e:
            assert "interpret" in str(e)
        else:
            raise AssertionError("malformed email accepted")

    model = privgov.ClusterModel.synthetic()
    label, domain, confidence = model.identify("loan credit emi borrower interest")
    assert domain == "Finance & Banking", (label, domain, confidence)

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
