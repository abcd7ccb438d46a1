static const int table[4] = {1, 2, 4, 8};
int pick(int i) { return table[i & 3]; }
