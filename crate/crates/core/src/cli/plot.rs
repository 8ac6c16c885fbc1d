use std::path::Path;

/// Gnuplot script plotting `I_h` (and `u`, for controlled output) from a
/// CSV written by the CLI.
pub fn plot_script(csv: &Path, with_control: bool, humans: f64) -> String {
    let csv = csv.display();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 't (days)'\n");
    if with_control {
        s.push_str("set multiplot layout 2,1\n");
        s.push_str("set ylabel 'I_h / N_h'\n");
        s.push_str(&format!(
            "plot '{csv}' using 1:($3/{humans}) with lines title 'I_h/N_h'\n"
        ));
        s.push_str("set ylabel 'u'\nset yrange [0:1.05]\n");
        s.push_str(&format!("plot '{csv}' using 1:7 with lines title 'u'\n"));
        s.push_str("unset multiplot\n");
    } else {
        s.push_str("set ylabel 'I_h'\n");
        s.push_str(&format!("plot '{csv}' using 1:3 with lines title 'I_h'\n"));
    }
    s.push_str("pause -1\n");
    s
}
