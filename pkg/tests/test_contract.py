def test_allocate_contract(client):
    r = client.post("/allocate", json={"samples": 2000, "trials": 1000, "seed": 5})
    assert r.status_code == 200

    data = r.json()
    for key in ("powers_dbm", "total_power_dbm", "upper_bounds", "lower_bounds", "empirical_outage", "feasible"):
        assert key in data
    assert "wall_time" not in data
    assert data["seed"] == 5
    assert isinstance(data["powers_dbm"], list)


def test_allocate_unknown_field(client):
    r = client.post("/allocate", json={"antenas": 4})
    assert r.status_code == 422
    assert r.json()["error"] == "ConfigurationError"


def test_allocate_invalid_values(client):
    assert client.post("/allocate", json={"pilot_length": 50}).status_code == 422
    assert client.post("/allocate", json={"trials": 10**9}).status_code == 422


def test_root_lists_defaults(client):
    data = client.get("/").json()
    assert data["defaults"]["antennas"] == 8
    assert data["noise_power_w"] > 0
