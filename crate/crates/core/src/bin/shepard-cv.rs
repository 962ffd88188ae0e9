fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(shepard_cv::cli::parse_and_dispatch(&argv));
}
