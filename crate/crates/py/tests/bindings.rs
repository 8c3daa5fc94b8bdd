use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn with_module(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let m = wrap_pymodule!(meshroute_py::meshroute_module)(py);
        let globals = PyDict::new(py);
        globals.set_item("mr", m).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.display(py);
            panic!("python check failed");
        }
    });
}

#[test]
fn topology_round_trips_and_answers_queries() {
    with_module(
        c"
t = mr.Topology.generate(25, seed=42)
assert t.node_count == 25 and len(t.gateways) == 3 and t.is_connected()
u = mr.Topology.from_json(t.to_json())
assert u.to_json() == t.to_json()
l = t.links()[0]
assert t.validate_path([l['u'], l['v']], require_gateway=False)
assert not t.validate_path([l['u'], l['u']], require_gateway=False)
assert 0 < t.shortest_path_cost(l['u'], l['v']) <= l['cost']
assert t.path_metrics([l['u'], l['v']])['hops'] == 1
assert mr.interference_factor(0) == 1.0 and mr.interference_factor(9) == 0.0
",
    );
}

#[test]
fn route_matches_oracle_on_small_graph() {
    with_module(
        c"
t = mr.Topology.generate(10, seed=3)
src = next(i for i in range(10) if i not in t.gateways)
r = mr.route(t, src, algorithm='hybrid', seed=1)
path, best = mr.oracle(t, src)
assert r['best_path'][0] == src and r['best_path'][-1] in t.gateways
assert abs(r['best_fitness']['total'] - best['total']) < 1e-9
assert r == {**mr.route(t, src, algorithm='hybrid', seed=1),
             'wall_time_ms': r['wall_time_ms'], 'time_to_best_ms': r['time_to_best_ms']}
s = mr.simulate(t, path, packets=1000, seed=5)
assert s['packet_count'] == 1000 and 0.0 <= s['pdr'] <= 1.0
",
    );
}

#[test]
fn bad_inputs_raise_value_error() {
    with_module(
        c"
for call in (lambda: mr.Topology.generate(1),
             lambda: mr.Topology.from_json('{}'),
             lambda: mr.route(mr.Topology.generate(8, seed=1), 0, algorithm='tabu'),
             lambda: mr.route(mr.Topology.generate(8, seed=1), 0, penalty_mode='soft'),
             lambda: mr.simulate(mr.Topology.generate(8, seed=1), [0, 0])):
    try:
        call()
    except ValueError:
        pass
    else:
        raise AssertionError('expected ValueError')
",
    );
}
