long widen(char c) { return (long)c + 0x10; }
float half(int v) { return (float)v / 2.0f; }
