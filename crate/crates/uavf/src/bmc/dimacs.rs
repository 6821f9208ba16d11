//! DIMACS CNF export for cross-checking formulas with external solvers.

use super::blast::CnfFormula;

/// Renders the formula in DIMACS text format: `p cnf V C` header, one
/// clause per line, each terminated by 0.
pub fn to_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    out.push_str(&format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len()));
    for clause in &formula.clauses {
        for lit in clause {
            out.push_str(&format!("{lit} "));
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_terminators() {
        let f = CnfFormula {
            num_vars: 3,
            clauses: vec![vec![1, -2], vec![2, 3], vec![-1]],
            ..Default::default()
        };
        let text = to_dimacs(&f);
        assert_eq!(text, "p cnf 3 3\n1 -2 0\n2 3 0\n-1 0\n");
    }
}
