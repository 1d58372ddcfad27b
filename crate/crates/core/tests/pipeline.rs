use nilsoliton::bracket::{validate, weight_support};
use nilsoliton::catalog;
use nilsoliton::doc::{BracketDocument, Coefficient, Document};
use nilsoliton::flow::{self, FlowOptions};
use nilsoliton::graphs;
use nilsoliton::soliton;
use nilsoliton::stratify::{certify_stratum, Certificate, DegenerationEvidence, Evidence, StratumStatus};

fn beta_seventh() -> Vec<f64> {
    (-4..=2).map(|x| x as f64 / 7.0).collect()
}

#[test]
fn positive_graph_gives_a_nilsoliton() {
    for g in [catalog::e6_graph(), catalog::d_graph(6), catalog::tree_five_plus_arm(), catalog::star_graph(5)] {
        let v = graphs::graph_einstein_nilradical(&g).unwrap();
        assert!(v.positive);
        let b = v.soliton.expect("positive graphs carry a soliton");
        assert!(validate(&b, 1e-12).jacobi_ok);
        let r = soliton::is_einstein(&b, 1e-9).unwrap();
        assert!(r.is_einstein, "{g}");
        assert!(v.payne.unwrap().is_einstein);
    }
}

#[test]
fn nonpositive_graph_has_a_witness_and_no_soliton() {
    let g = graphs::grst(2, 1, 1).unwrap();
    let v = graphs::graph_einstein_nilradical(&g).unwrap();
    assert!(!v.positive && v.soliton.is_none());
    assert_eq!(v.nonpositive, vec![0]);
    assert_eq!(v.witness.unwrap().config, (2, 1, 1));
}

#[test]
fn lambda_zero_is_certified_through_its_degeneration() {
    let b = catalog::lambda(0.0);
    assert!(!soliton::is_einstein(&b, 1e-8).unwrap().is_einstein);
    let evidence = Evidence {
        degeneration: Some(DegenerationEvidence {
            exponents: vec![0, -1, -1, -1, -2, -2, -2],
            scales: vec![1.0; 7],
            witness: Some(catalog::graded([1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0])),
        }),
        flow_limit: None,
    };
    let r = certify_stratum(&b, &evidence, 1e-9).unwrap();
    assert_eq!(r.status, StratumStatus::Certified);
    assert_eq!(r.certificate, Some(Certificate::DiagonalDegeneration));
    for (x, y) in r.beta_plus.iter().zip(beta_seventh()) {
        assert!((x - y).abs() < 1e-10);
    }
    let bare = certify_stratum(&b, &Evidence::default(), 1e-9).unwrap();
    assert_eq!(bare.status, StratumStatus::Candidate);
}

#[test]
fn flow_limit_certifies_the_chain() {
    let b = catalog::flow_chain();
    let traj = flow::integrate(&b, &FlowOptions::default()).unwrap();
    let evidence = Evidence { degeneration: None, flow_limit: Some(traj.limit.clone()) };
    let r = certify_stratum(&b, &evidence, 1e-7).unwrap();
    assert_eq!(r.status, StratumStatus::Certified);
    assert!(soliton::payne_test(&traj.limit, 1e-8).unwrap().is_einstein);
    assert_eq!(weight_support(&traj.limit).len(), 3);
}

#[test]
fn exact_documents_feed_the_analysis() {
    let entries = [("sqrt(5)", 1, 2, 3), ("sqrt(8)", 1, 3, 4), ("3", 1, 4, 5), ("sqrt(8)", 1, 5, 6), ("sqrt(5)", 1, 6, 7)];
    let d = BracketDocument {
        dim: 7,
        entries: entries
            .iter()
            .map(|&(c, i, j, k)| nilsoliton::doc::Entry { i, j, k, c: Coefficient::parse(c).unwrap() })
            .collect(),
        name: Some("mu1'".into()),
        source: None,
    };
    assert!(!d.is_exact());
    let text = Document::Bracket(d.clone()).to_json();
    let Document::Bracket(back) = Document::parse(&text).unwrap() else { panic!() };
    assert_eq!(back, d);
    let b = back.to_bracket().unwrap();
    assert_eq!(b, catalog::mu1_prime());
    let t = soliton::is_einstein(&b, 1e-9).unwrap();
    assert_eq!(t.eigenvalue_type().unwrap().values, vec![1, 16, 17, 18, 19, 20, 21]);
}
