fn main() {
    println!("lowmach");
}
