use super::*;
use crate::rational::rat_int;

fn broughton_text() -> &'static str {
    "n = 2\nG1 = z1 + z1^2*z2\nrho = 0, 1\n"
}

#[test]
fn parses_broughton() {
    let spec = parse_mapping(broughton_text()).unwrap();
    assert_eq!(spec.n, 2);
    assert_eq!(spec.map.components().len(), 1);
    let g = &spec.map.components()[0];
    assert_eq!(g.num_terms(), 2);
    assert_eq!(g.degree(), Some(3));
    assert!(g.is_holomorphic());
    assert_eq!(spec.weights.weights(), &[rat_int(0), rat_int(1)]);
}

#[test]
fn parses_aliases_and_semicolons() {
    let a = parse_mapping("n=2; G1 = z + z^2*w; rho = 0,1").unwrap();
    let b = parse_mapping(broughton_text()).unwrap();
    assert_eq!(a.map, b.map);
}

#[test]
fn parses_two_component_map() {
    let spec = parse_mapping("n=3; G1 = z1; G2 = z1*z3^2 + z2; rho = 0,0,1").unwrap();
    assert_eq!(spec.map.components().len(), 2);
    assert_eq!(spec.map.components()[1].degree(), Some(3));
}

#[test]
fn rejects_conjugate_in_component() {
    let err = parse_mapping("n=2; G1 = conj(z1); rho = 1,0").unwrap_err();
    match err {
        SpecError::Semantic { line, col, ref msg } => {
            assert_eq!(line, 1);
            assert!(col > 0);
            assert!(msg.contains("conjugate"));
        }
        other => panic!("expected semantic error, got {other:?}"),
    }
}

#[test]
fn rejects_dimension_mismatch() {
    assert!(matches!(
        parse_mapping("n=3; G1 = z1; rho = 0,0,1"),
        Err(SpecError::Dimension { .. })
    ));
    assert!(matches!(
        parse_mapping("n=2; G1 = z1; rho = 0,1,0"),
        Err(SpecError::Dimension { .. })
    ));
}

#[test]
fn rejects_all_zero_weights() {
    assert!(matches!(
        parse_mapping("n=2; G1 = z1; rho = 0,0"),
        Err(SpecError::ZeroWeights)
    ));
}

#[test]
fn syntax_errors_carry_position() {
    let err = parse_mapping("n = 2\nG1 = z1 + * z2\nrho = 0,1").unwrap_err();
    match err {
        SpecError::Syntax { line, col, .. } => {
            assert_eq!(line, 2);
            assert_eq!(col, 11);
        }
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn rational_coefficients_and_i() {
    let spec = parse_mapping("n=2; G1 = 3/2*z1 + i*z2 - 1/3; rho = 1,1").unwrap();
    let g = &spec.map.components()[0];
    let text = format!("{g}");
    assert!(text.contains("3/2"), "{text}");
    assert!(!text.contains('.'), "no decimals in canonical form: {text}");
}

#[test]
fn charts_parse_and_reject_phi_in_components() {
    let spec =
        parse_mapping("n=2; G1 = z1; rho = 0,1; chart1 = phi; chart2 = z1*conj(z1); decay2 = 1")
            .unwrap();
    assert_eq!(spec.charts.len(), 2);
    assert_eq!(spec.charts[0], ChartExpr::Phi);
    assert_eq!(spec.decay, vec![None, Some(1)]);

    assert!(matches!(
        parse_mapping("n=2; G1 = phi; rho = 0,1"),
        Err(SpecError::Semantic { .. })
    ));
}

#[test]
fn roundtrip_is_structural_identity() {
    for text in [
        broughton_text().to_string(),
        "n=3; G1 = z + z^2*w; G2 = zeta; rho = 0,1,0".to_string(),
        "n=3; G1 = z; G2 = z*zeta^2 + w; rho = 0,0,1; chart1 = phi; decay1 = 2".to_string(),
        "n=2; G1 = 3/2*z1^4 - i*z2 + (1/2 - 2*i)*z1*z2; rho = 1/2, 3".to_string(),
    ] {
        let spec = parse_mapping(&text).unwrap();
        let printed = format_spec(&spec);
        let reparsed = parse_mapping(&printed).unwrap_or_else(|e| {
            panic!("reparse failed for {printed:?}: {e}");
        });
        assert_eq!(spec, reparsed, "roundtrip mismatch for:\n{printed}");
        // Canonical form is a fixed point.
        assert_eq!(printed, format_spec(&reparsed));
    }
}

#[test]
fn crlf_and_comments_accepted() {
    let spec = parse_mapping("# a map\r\nn = 2\r\nG1 = z1 # inline\r\nrho = 1, 0\r\n").unwrap();
    assert_eq!(spec.n, 2);
}

#[test]
fn exponent_and_size_guards() {
    assert!(parse_mapping("n=2; G1 = z1^65; rho = 0,1").is_err());
    assert!(parse_mapping("n=17; G1 = z1; rho = 1").is_err());
    // expansion budget: (1+z1+z2)^64 would have ~2000 terms, fine;
    // deeply nested powers of fat sums must error out, not hang.
    let fat = "n=2; G1 = (z1 + z2 + 1)^64; rho = 0,1";
    let _ = parse_mapping(fat); // must terminate either way
}

#[test]
fn parse_poly_helper_allows_mixed_terms() {
    let p = parse_poly(2, "z1*conj(z1) - 2*conj(z2)").unwrap();
    assert!(!p.is_holomorphic());
    assert_eq!(p.num_terms(), 2);
}
