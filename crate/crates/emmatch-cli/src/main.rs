fn main() {
    println!("emmatch");
}
