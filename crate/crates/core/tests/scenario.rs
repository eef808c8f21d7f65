use qcausal_core::scenario::presets::*;
use qcausal_core::scenario::*;
use qcausal_core::Error;

fn edges(s: &CausalStructure) -> Vec<(String, String)> {
    let mut e = s.edges.clone();
    e.sort();
    e
}

fn ids(s: &CausalStructure) -> Vec<String> {
    let mut v: Vec<String> = s.nodes.iter().map(|n| n.id.clone()).collect();
    v.sort();
    v
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    v.sort();
    v
}

#[test]
fn parses_scenario_document() {
    let text = r#"{"nodes":[{"id":"L","kind":"latent"},{"id":"A","kind":"observed","cardinality":3}],
                   "edges":[["L","A"]]}"#;
    let s = parse_structure(text).unwrap();
    assert_eq!(s.nodes.len(), 2);
    assert_eq!(s.nodes[1].cardinality, Some(3));
    assert_eq!(classify(&s), StructureClass::Correlation);
    let back = parse_structure(&s.to_json()).unwrap();
    assert_eq!(back, s);
}

#[test]
fn rejects_bad_documents() {
    assert!(matches!(parse_structure("{\"nodes\": ["), Err(Error::Syntax { .. })));
    let cyc = r#"{"nodes":[{"id":"A","kind":"observed","cardinality":2},{"id":"B","kind":"observed","cardinality":2}],
                  "edges":[["A","B"],["B","A"]]}"#;
    assert!(matches!(parse_structure(cyc), Err(Error::Cycle(_))));
    let dup = r#"{"nodes":[{"id":"A","kind":"observed","cardinality":2},{"id":"A","kind":"latent"}],"edges":[]}"#;
    assert!(matches!(parse_structure(dup), Err(Error::DuplicateId(_))));
    let unknown = r#"{"nodes":[{"id":"A","kind":"observed","cardinality":2}],"edges":[["Z","A"]]}"#;
    assert!(matches!(parse_structure(unknown), Err(Error::UnknownNode(_))));
    assert!(matches!(parse_structure(r#"{"nodes":[],"edges":[]}"#), Err(Error::NoNodes)));
}

#[test]
fn latent_leaf_is_rejected() {
    let s = CausalStructure::new(
        vec![Node::latent("L"), Node::latent("M"), Node::observed("A", 2)],
        &[("L", "A"), ("L", "M")],
    );
    let err = s.and_then(|s| prepare(&s).map(|_| ()));
    assert!(err.is_err());
}

#[test]
fn classification_of_presets() {
    assert_eq!(classify(&triangle(2)), StructureClass::Correlation);
    assert_eq!(classify(&bell(2, 2)), StructureClass::Network);
    assert_eq!(classify(&instrumental(2, 2)), StructureClass::LatentExogenous);
    assert_eq!(classify(&shared_setting_triangle(2, 2)), StructureClass::LatentExogenous);
    assert_eq!(classify(&switched_source(2, 2)), StructureClass::NonExogenous);
}

#[test]
fn instrumental_becomes_bell() {
    let (s, report) = interrupt(&instrumental(2, 3)).unwrap();
    assert_eq!(classify(&s), StructureClass::Network);
    assert_eq!(ids(&s), vec!["A", "A_1#", "B", "X", "rho"]);
    assert_eq!(
        edges(&s),
        pairs(&[("X", "A"), ("rho", "A"), ("rho", "B"), ("A_1#", "B")])
    );
    assert_eq!(
        report.post_selection,
        vec![PostSelection {
            copy: "A_1#".into(),
            original: "A".into()
        }]
    );
    let copy = &s.nodes[s.index_of("A_1#").unwrap()];
    assert_eq!(copy.cardinality, Some(2));
    let net = NetworkScenario::from_structure(&s, &[], &report).unwrap();
    assert_eq!(net.sources, vec!["rho"]);
    assert_eq!(net.parties.len(), 2);
    assert!(net.parties.iter().all(|p| p.settings.len() == 1 && p.slots.len() == 1));
}

#[test]
fn shared_setting_triangle_gets_three_settings() {
    let (s, report) = interrupt(&shared_setting_triangle(2, 2)).unwrap();
    assert_eq!(classify(&s), StructureClass::Network);
    assert!(s.index_of("X").is_none());
    for (i, party) in ["A", "B", "C"].iter().enumerate() {
        let copy = format!("X_{}#", i + 1);
        assert!(s.edges.contains(&(copy.clone(), party.to_string())));
        assert_eq!(report.original_of(&copy), "X");
    }
    assert_eq!(report.post_selection.len(), 3);
    assert_eq!(report.setting_factorization, vec![vec!["X".to_string()]]);
}

#[test]
fn switched_source_gives_endogenous_pair() {
    let (e, _) = exogenize(&switched_source(2, 2)).unwrap();
    assert_eq!(
        e.groups,
        vec![EndogenousGroupSpec {
            members: vec!["B".into(), "C".into()],
            settings: vec!["S".into()],
            sources: vec!["rho_AS".into()],
        }]
    );
    assert!(e.structure.index_of("rho_BC").is_none());
    assert_eq!(
        edges(&e.structure),
        pairs(&[
            ("rho_AS", "A"),
            ("rho_AS", "B"),
            ("S", "B"),
            ("rho_AS", "C"),
            ("S", "C")
        ])
    );
    let p = prepare(&switched_source(2, 2)).unwrap();
    assert_eq!(p.network.groups.len(), 1);
    assert_eq!(p.network.groups[0].members.len(), 2);
}

#[test]
fn rewriting_is_idempotent() {
    for s in [instrumental(2, 2), shared_setting_triangle(2, 2), bell(2, 2), triangle(3)] {
        let (once, _) = interrupt(&s).unwrap();
        let (twice, again) = interrupt(&once).unwrap();
        assert_eq!(once, twice);
        assert!(again.post_selection.is_empty());
    }
    let (once, _) = exogenize(&switched_source(2, 2)).unwrap();
    let (twice, _) = exogenize(&once.structure).unwrap();
    assert_eq!(once.structure, twice.structure);
    assert!(twice.groups.is_empty());
}

#[test]
fn post_selection_matches_added_copies() {
    for s in [instrumental(2, 2), shared_setting_triangle(2, 3), bell(2, 2)] {
        let p = prepare(&s).unwrap();
        let added = p
            .network_structure
            .nodes
            .iter()
            .filter(|n| n.id.ends_with('#'))
            .count();
        assert_eq!(added, p.report.post_selection.len());
    }
}

#[test]
fn conditional_rows_are_normalized() {
    let s = instrumental(2, 2);
    let p = prepare(&s).unwrap();
    // P(x, a, b) with a correlated with x and b.
    let table = vec![0.3, 0.1, 0.05, 0.05, 0.1, 0.05, 0.05, 0.3];
    let d = Distribution::new(
        vec!["X".into(), "A".into(), "B".into()],
        vec![2, 2, 2],
        table,
    )
    .unwrap();
    let t = conditional_target(&d, &s, &p.report).unwrap();
    for row in &t.rows {
        if let Some(probs) = &row.probabilities {
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
    let cells = network_cells(&t, &p.network).unwrap();
    assert!(!cells.is_empty());
}

#[test]
fn zero_probability_setting_warns() {
    let s = bell(2, 2);
    let p = prepare(&s).unwrap();
    let vars: Vec<String> = s
        .nodes
        .iter()
        .filter(|n| !n.is_latent())
        .map(|n| n.id.clone())
        .collect();
    let x = vars.iter().position(|v| v == "X").unwrap();
    // X = 1 never happens; everything else uniform.
    let table: Vec<f64> = (0..16)
        .map(|flat| if (flat >> (3 - x)) & 1 == 0 { 0.125 } else { 0.0 })
        .collect();
    let d = Distribution::new(vars, vec![2; 4], table).unwrap();
    let t = conditional_target(&d, &s, &p.report).unwrap();
    assert!(!t.warnings.is_empty());
    assert!(t.rows.iter().any(|r| r.probabilities.is_none()));
}

#[test]
fn distribution_must_be_normalized() {
    let d = Distribution::new(vec!["A".into()], vec![2], vec![0.5, 0.6]);
    assert!(matches!(d, Err(Error::Distribution(_))));
}
