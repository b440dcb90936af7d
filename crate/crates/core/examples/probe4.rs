use std::time::Instant;
use tensorcert::bounds::substitution_lower_bound_with_budget;
use tensorcert::field::FieldSpec;
use tensorcert::tensor::strassen_tensor;

fn main() {
    let f5 = FieldSpec::prime(5).unwrap();
    for q in [3usize] {
        let s = strassen_tensor(&f5, q, 3).unwrap();
        let start = Instant::now();
        let b = substitution_lower_bound_with_budget(&s, 50_000_000).unwrap();
        println!("q={q}: bound {:?} in {:?}", b, start.elapsed());
    }
}
