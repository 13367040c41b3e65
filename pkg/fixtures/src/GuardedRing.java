public class GuardedRing implements Runnable {
    private Node g;
    private Node h;
    private Node p;
    private Node q;
    private boolean b1;
    private boolean b2;

    public GuardedRing() {
        g = new Node();
        h = new Node();
        g.token = true;
        h.token = true;
        p = g.addNode();
        q = h.addNode();
    }

    public void run() {
        for (int step = 0; step < 12; step++) {
            p = p.moveNext();
            q = q.moveBack();
            work();
        }
    }

    private void work() {
        b2 = (h.equals(p) || p.token);
        b1 = p.token;
        if (b2 && b1 && (g.equals(h))) {
            Z(10);
        }
    }

    private void Z(int k) {
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
        GuardedRing r = new GuardedRing();
        r.run();
    }
}
