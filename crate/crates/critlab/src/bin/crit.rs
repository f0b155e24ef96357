fn main() {
    // placeholder; batch front-end lands with the job module
}
