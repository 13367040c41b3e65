public class UnguardedDummy {
    public static final int LIMIT = 100;
    public static final long SEED = 0x0123456789ABCDEFL;
    public static final float SCALE = 1.5f;
    public static final double RATIO = 2.5;

    public static int pick(int n) {
        switch (n) {
        case 0:
            return 10;
        case 1:
            return 20;
        case 2:
            return 30;
        default:
            return 0;
        }
    }

    public static int grade(int n) {
        switch (n) {
        case 10:
            return 1;
        case 100:
            return 2;
        default:
            return -1;
        }
    }

    public void poke(Runnable r) {
        r.run();
    }

    private void W(int k) {
        int[] a = new int[5];
        a[0] = 5; a[1] = 7; a[2] = 1; a[3] = 6; a[4] = 4;
        int tmp = 0;
        int i = 0;
        int j = 0;
        for (i = 0; i < 4; i++) {
            for (j = 1; j < 5; j++) {
                if (a[j] < a[i]) {
                    tmp = a[j];
                    a[i] = a[j];
                    a[j] = tmp;
                }
            }
        }
        for (i = 0; i < 5; i++) {
            tmp = tmp + k;
            tmp = tmp - a[i];
            tmp = tmp * 3;
            tmp = tmp / 2;
            tmp = tmp % 7;
            tmp = tmp & k;
            tmp = tmp | a[i];
            tmp = tmp ^ i;
            if (tmp < 0) {
                tmp = k - tmp;
            }
            if (tmp > 0) {
                tmp = tmp + j;
            }
            a[i] = tmp % 5;
            tmp = tmp * (i + 1);
            tmp = tmp / (j + 2);
            tmp = tmp & 15;
            tmp = tmp | 1;
            tmp = tmp ^ a[i];
        }
        if (a != null) {
            a[0] = tmp;
        }
        System.out.println(a[2]);
    }

    public static void main(String[] args) {
        System.out.println("unguarded");
    }
}
