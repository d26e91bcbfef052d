fn main() {
    let vals = [0.1f64, -0.5, -3.7754, -61.25, 0.9999999999];
    for v in vals {
        println!("exp({v}) = {:016x}", v.exp().to_bits());
    }
    let mut acc = 0.0f64;
    for i in 0..16 {
        acc += (-(i as f64) * 0.37).exp();
    }
    println!("sum = {:016x}", acc.to_bits());
}
