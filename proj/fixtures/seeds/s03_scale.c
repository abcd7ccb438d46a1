double scale(double x) { return x * 2.0; }
