fn main() {
    std::process::exit(sbp_sphere::cli::run());
}
