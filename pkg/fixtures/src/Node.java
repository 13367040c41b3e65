public class Node {
    public boolean token;
    public Node head;
    public Node tail;

    public Node() {
        this.token = false;
        this.head = this;
        this.tail = this;
    }

    public Node addNode() {
        Node p = new Node();
        p.head = this.tail;
        this.head = p;
        return p;
    }

    public Node moveNext() {
        return this.tail.head;
    }

    public Node moveBack() {
        return this.head.tail;
    }
}
