void spin(float a) { __asm__("fsqrt" : "+f"(a)); }
